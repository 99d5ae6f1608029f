//! Fixed-topology feedforward network with a flat gene encoding.
//!
//! Gene layout for an `i-h-o` topology:
//!
//! | range                    | contents                                   |
//! |--------------------------|--------------------------------------------|
//! | `0 .. i*h`               | input->hidden weights, row-major by hidden |
//! | `i*h .. i*h + h*o`       | hidden->output weights, row-major by output|
//! | `i*h + h*o`              | bias shared by all hidden nodes            |
//! | `i*h + h*o + 1`          | bias shared by all output nodes            |
//!
//! The default 2-8-2 topology encodes into 34 genes. Both layers use the
//! logistic sigmoid.

use serde::{Deserialize, Serialize};

use crate::marketdata::Pair;
use crate::metaheuristics::Objective;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub input_nodes: usize,
    pub hidden_nodes: usize,
    pub output_nodes: usize,
}

impl Default for Topology {
    fn default() -> Self {
        Topology {
            input_nodes: 2,
            hidden_nodes: 8,
            output_nodes: 2,
        }
    }
}

impl Topology {
    pub fn new(input_nodes: usize, hidden_nodes: usize, output_nodes: usize) -> Result<Self> {
        if input_nodes == 0 || hidden_nodes == 0 || output_nodes == 0 {
            return Err(Error::InvalidConfig(
                "every layer needs at least one node".into(),
            ));
        }
        Ok(Topology {
            input_nodes,
            hidden_nodes,
            output_nodes,
        })
    }

    pub fn encoded_len(&self) -> usize {
        self.input_nodes * self.hidden_nodes + self.hidden_nodes * self.output_nodes + 2
    }

    fn split<'a>(&self, genes: &'a [f64]) -> (&'a [f64], &'a [f64], f64, f64) {
        let a = self.input_nodes * self.hidden_nodes;
        let b = a + self.hidden_nodes * self.output_nodes;
        (&genes[..a], &genes[a..b], genes[b], genes[b + 1])
    }
}

/// `e^x` by range reduction to `|r| <= ln2/2` and a degree-12 Taylor
/// polynomial; relative error below 1e-15 on `[-700, 700]`. Branch-free
/// and pure arithmetic, so it vectorizes and gives identical bits on every
/// platform.
#[inline(always)]
fn exp_poly(x: f64) -> f64 {
    const LOG2E: f64 = std::f64::consts::LOG2_E;
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    // 1.5 * 2^52: adding it rounds to an integer held in the low mantissa bits.
    const SHIFTER: f64 = 6_755_399_441_055_744.0;

    let x = x.clamp(-700.0, 700.0);
    let t = x * LOG2E + SHIFTER;
    let k = t - SHIFTER;
    let r = (x - k * LN2_HI) - k * LN2_LO;
    let mut p = 1.0 / 479_001_600.0;
    for c in [
        1.0 / 39_916_800.0,
        1.0 / 3_628_800.0,
        1.0 / 362_880.0,
        1.0 / 40_320.0,
        1.0 / 5_040.0,
        1.0 / 720.0,
        1.0 / 120.0,
        1.0 / 24.0,
        1.0 / 6.0,
        0.5,
        1.0,
        1.0,
    ] {
        p = p * r + c;
    }
    let ki = t.to_bits().wrapping_sub(SHIFTER.to_bits()) as i64;
    let scale = f64::from_bits((ki.wrapping_add(1023) as u64) << 52);
    p * scale
}

/// Logistic function `1 / (1 + e^-z)`.
#[inline(always)]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + exp_poly(-z))
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn forward_raw(
    topology: &Topology,
    w_ih: &[f64],
    w_ho: &[f64],
    b_h: f64,
    b_o: f64,
    input: &[f64],
    hidden: &mut [f64],
    output: &mut [f64],
) {
    let ni = topology.input_nodes;
    let nh = topology.hidden_nodes;
    for (j, h) in hidden.iter_mut().enumerate() {
        let row = &w_ih[j * ni..(j + 1) * ni];
        let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum();
        *h = sigmoid(z + b_h);
    }
    for (k, y) in output.iter_mut().enumerate() {
        let row = &w_ho[k * nh..(k + 1) * nh];
        let z: f64 = row.iter().zip(hidden.iter()).map(|(w, h)| w * h).sum();
        *y = sigmoid(z + b_o);
    }
}

/// Decoded network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub topology: Topology,
    /// `hidden x input`, row-major.
    pub w_ih: Vec<f64>,
    /// `output x hidden`, row-major.
    pub w_ho: Vec<f64>,
    pub b_h: f64,
    pub b_o: f64,
}

fn check_genes(genes: &[f64], topology: &Topology) -> Result<()> {
    if genes.len() != topology.encoded_len() {
        return Err(Error::LengthMismatch {
            expected: topology.encoded_len(),
            got: genes.len(),
        });
    }
    if let Some(i) = genes.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

impl Network {
    pub fn decode(genes: &[f64], topology: &Topology) -> Result<Self> {
        check_genes(genes, topology)?;
        let (w_ih, w_ho, b_h, b_o) = topology.split(genes);
        Ok(Network {
            topology: *topology,
            w_ih: w_ih.to_vec(),
            w_ho: w_ho.to_vec(),
            b_h,
            b_o,
        })
    }

    pub fn encode(&self) -> Vec<f64> {
        let mut genes = Vec::with_capacity(self.topology.encoded_len());
        genes.extend_from_slice(&self.w_ih);
        genes.extend_from_slice(&self.w_ho);
        genes.push(self.b_h);
        genes.push(self.b_o);
        genes
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.topology.input_nodes, "input width");
        let mut hidden = vec![0.0; self.topology.hidden_nodes];
        let mut output = vec![0.0; self.topology.output_nodes];
        forward_raw(
            &self.topology,
            &self.w_ih,
            &self.w_ho,
            self.b_h,
            self.b_o,
            input,
            &mut hidden,
            &mut output,
        );
        output
    }
}

/// Training fitness: RMSE of each output channel over all pairs, averaged
/// across channels. Lower is better.
pub fn fitness(genes: &[f64], topology: &Topology, pairs: &[Pair]) -> Result<f64> {
    check_genes(genes, topology)?;
    if pairs.is_empty() {
        return Err(Error::Empty);
    }
    if topology.input_nodes != 2 || topology.output_nodes != 2 {
        return Err(Error::InvalidConfig(
            "open/close pairs need a network with 2 inputs and 2 outputs".into(),
        ));
    }
    Ok(fitness_unchecked(genes, topology, pairs))
}

fn fitness_unchecked(genes: &[f64], topology: &Topology, pairs: &[Pair]) -> f64 {
    if topology.hidden_nodes == 8 {
        #[cfg(target_arch = "x86_64")]
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2.
            return unsafe { fitness_2h2_avx2(genes, pairs) };
        }
        return fitness_2h2::<8>(genes, pairs);
    }
    let (w_ih, w_ho, b_h, b_o) = topology.split(genes);
    let mut hidden = vec![0.0; topology.hidden_nodes];
    let mut out = [0.0; 2];
    let mut sq = [0.0; 2];
    for p in pairs {
        forward_raw(topology, w_ih, w_ho, b_h, b_o, &p.input, &mut hidden, &mut out);
        for k in 0..2 {
            let e = p.target[k] - out[k];
            sq[k] += e * e;
        }
    }
    let n = pairs.len() as f64;
    ((sq[0] / n).sqrt() + (sq[1] / n).sqrt()) / 2.0
}

// Wider vectors only; FMA stays off so results match the baseline build bit for bit.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn fitness_2h2_avx2(genes: &[f64], pairs: &[Pair]) -> f64 {
    fitness_2h2::<8>(genes, pairs)
}

/// Fixed-width kernel for `2-H-2` networks; same arithmetic as the generic
/// path, laid out so the hidden layer vectorizes.
#[inline(always)]
fn fitness_2h2<const H: usize>(genes: &[f64], pairs: &[Pair]) -> f64 {
    let mut w0 = [0.0; H];
    let mut w1 = [0.0; H];
    for j in 0..H {
        w0[j] = genes[2 * j];
        w1[j] = genes[2 * j + 1];
    }
    let mut v0 = [0.0; H];
    let mut v1 = [0.0; H];
    v0.copy_from_slice(&genes[2 * H..3 * H]);
    v1.copy_from_slice(&genes[3 * H..4 * H]);
    let b_h = genes[4 * H];
    let b_o = genes[4 * H + 1];

    let mut sq = [0.0; 2];
    for p in pairs {
        let mut h = [0.0; H];
        for j in 0..H {
            h[j] = sigmoid(w0[j] * p.input[0] + w1[j] * p.input[1] + b_h);
        }
        let mut z0 = 0.0;
        let mut z1 = 0.0;
        for j in 0..H {
            z0 += v0[j] * h[j];
            z1 += v1[j] * h[j];
        }
        let e0 = p.target[0] - sigmoid(z0 + b_o);
        let e1 = p.target[1] - sigmoid(z1 + b_o);
        sq[0] += e0 * e0;
        sq[1] += e1 * e1;
    }
    let n = pairs.len() as f64;
    ((sq[0] / n).sqrt() + (sq[1] / n).sqrt()) / 2.0
}

/// [`fitness`] bound to a training set, for use by the optimizers.
#[derive(Debug, Clone)]
pub struct FfnnObjective {
    topology: Topology,
    pairs: Vec<Pair>,
}

impl FfnnObjective {
    pub fn new(topology: Topology, pairs: Vec<Pair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty);
        }
        if topology.input_nodes != 2 || topology.output_nodes != 2 {
            return Err(Error::InvalidConfig(
                "open/close pairs need a network with 2 inputs and 2 outputs".into(),
            ));
        }
        Ok(FfnnObjective { topology, pairs })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

impl Objective for FfnnObjective {
    fn dimension(&self) -> usize {
        self.topology.encoded_len()
    }

    /// Non-finite genes yield NaN, which the engines reject.
    fn evaluate(&self, x: &[f64]) -> f64 {
        if x.len() != self.dimension() || x.iter().any(|g| !g.is_finite()) {
            return f64::NAN;
        }
        fitness_unchecked(x, &self.topology, &self.pairs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn topo() -> Topology {
        Topology::default()
    }

    #[test]
    fn exp_matches_std() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200_000 {
            let x: f64 = rng.random_range(-700.0..700.0);
            let (a, b) = (exp_poly(x), x.exp());
            assert!(((a - b) / b).abs() < 1e-15, "x = {x}: {a} vs {b}");
        }
        assert_eq!(exp_poly(0.0), 1.0);
        assert!(exp_poly(-1e6) > 0.0 && exp_poly(1e6).is_finite());
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn fixed_kernel_matches_generic_layout() {
        // Same genes through Network::forward and the 2-8-2 kernel.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<Pair> = (0..64)
            .map(|_| Pair { input: [rng.random(), rng.random()], target: [rng.random(), rng.random()] })
            .collect();
        let genes: Vec<f64> = (0..34).map(|_| rng.random_range(-3.0..3.0)).collect();
        let net = Network::decode(&genes, &topo()).unwrap();
        let (mut s0, mut s1) = (0.0, 0.0);
        for p in &pairs {
            let y = net.forward(&p.input);
            s0 += (p.target[0] - y[0]).powi(2);
            s1 += (p.target[1] - y[1]).powi(2);
        }
        let n = pairs.len() as f64;
        let expected = ((s0 / n).sqrt() + (s1 / n).sqrt()) / 2.0;
        assert!((fitness(&genes, &topo(), &pairs).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn default_length_is_34() {
        assert_eq!(topo().encoded_len(), 34);
        assert!(Topology::new(0, 8, 2).is_err());
    }

    #[test]
    fn decode_layout() {
        let zero = Network::decode(&[0.0; 34], &topo()).unwrap();
        assert!(zero.w_ih.iter().chain(&zero.w_ho).all(|w| *w == 0.0));
        assert_eq!((zero.b_h, zero.b_o), (0.0, 0.0));

        let genes: Vec<f64> = (0..34).map(|i| i as f64 * 0.1).collect();
        let net = Network::decode(&genes, &topo()).unwrap();
        assert_eq!(net.w_ih, genes[..16]);
        assert_eq!(net.w_ho, genes[16..32]);
        assert_eq!(net.b_h, genes[32]);
        assert_eq!(net.b_o, genes[33]);
        assert_eq!(net.encode(), genes);

        assert!(matches!(
            Network::decode(&[0.0; 33], &topo()),
            Err(Error::LengthMismatch { expected: 34, got: 33 })
        ));
        let mut bad = [0.0; 34];
        bad[5] = f64::NAN;
        assert!(matches!(Network::decode(&bad, &topo()), Err(Error::NonFinite(5))));
    }

    #[test]
    fn forward_hand_cases() {
        let net = Network::decode(&[0.0; 34], &topo()).unwrap();
        assert_eq!(net.forward(&[0.3, -7.0]), vec![0.5, 0.5]);

        let mut genes = [0.0; 34];
        genes[33] = 3f64.ln();
        let net = Network::decode(&genes, &topo()).unwrap();
        for y in net.forward(&[1.0, 2.0]) {
            assert!((y - 0.75).abs() < 1e-15);
        }
    }

    #[test]
    fn forward_strictly_inside_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let genes: Vec<f64> = (0..34).map(|_| rng.random_range(-5.0..5.0)).collect();
            let net = Network::decode(&genes, &topo()).unwrap();
            let x = [rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)];
            for y in net.forward(&x) {
                assert!(y > 0.0 && y < 1.0);
            }
        }
    }

    #[test]
    fn fitness_hand_case() {
        // Zero network predicts [0.5, 0.5]; per-channel RMSE (0, 0.4).
        let pairs = [Pair {
            input: [0.1, 0.2],
            target: [0.5, 0.9],
        }];
        let f = fitness(&[0.0; 34], &topo(), &pairs).unwrap();
        assert!((f - 0.2).abs() < 1e-15);

        let perfect = [Pair {
            input: [0.0, 0.0],
            target: [0.5, 0.5],
        }];
        assert_eq!(fitness(&[0.0; 34], &topo(), &perfect).unwrap(), 0.0);
        assert!(matches!(fitness(&[0.0; 34], &topo(), &[]), Err(Error::Empty)));
    }

    #[test]
    fn fitness_permutation_invariant_and_continuous() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pairs: Vec<Pair> = (0..100)
            .map(|_| Pair {
                input: [rng.random(), rng.random()],
                target: [rng.random(), rng.random()],
            })
            .collect();
        let genes: Vec<f64> = (0..34).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = fitness(&genes, &topo(), &pairs).unwrap();
        pairs.reverse();
        let g = fitness(&genes, &topo(), &pairs).unwrap();
        assert!((f - g).abs() < 1e-12);

        let obj = FfnnObjective::new(topo(), pairs).unwrap();
        for i in 0..34 {
            let mut p = genes.clone();
            p[i] += 1e-8;
            assert!((obj.evaluate(&p) - obj.evaluate(&genes)).abs() <= 1e-4);
        }
        assert_eq!(obj.evaluate(&genes), g);
    }
}
