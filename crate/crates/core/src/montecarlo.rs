//! Point-process sampling, conditional success probabilities and the meta
//! distribution of reliability.
//!
//! Every realization draws from its own ChaCha8 stream keyed by the master
//! seed and the realization index, so results are identical for any
//! scheduling. Fading draws use a separate key.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::analytic::beta_prime;
use crate::error::{invalid, Error, Result};
use crate::par::{compensated_sum, Execution};
use crate::scene::{tx_grid, Link, PathLossModel, Position, RoadNetwork, Scenario};

const TAG_PPP: u64 = u64::from_le_bytes(*b"ppp\0\0\0\0\0");
const TAG_FADING: u64 = u64::from_le_bytes(*b"fading\0\0");

fn keyed_rng(master_seed: u64, tag: u64, sub: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag.to_le_bytes());
    key[16..24].copy_from_slice(&sub.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Stream that places the interferers of realization `index`.
pub fn realization_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    keyed_rng(master_seed, TAG_PPP, 0, index)
}

/// Fading stream of realization `index`; `sub` separates transmitter
/// positions within a sweep.
pub fn fading_rng(master_seed: u64, index: u64, sub: u64) -> ChaCha8Rng {
    keyed_rng(master_seed, TAG_FADING, sub, index)
}

/// Active interferers of one traffic snapshot.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PppRealization {
    pub interferers_x: Vec<f64>,
    pub interferers_y: Vec<f64>,
}

impl PppRealization {
    pub fn len(&self) -> usize {
        self.interferers_x.len() + self.interferers_y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        let x = self.interferers_x.iter().map(|&c| Position::OnHorizontal(c));
        let y = self.interferers_y.iter().map(|&c| Position::OnVertical(c));
        x.chain(y)
    }
}

fn sample_road<R: Rng + ?Sized>(half_len: f64, rate: f64, rng: &mut R) -> Vec<f64> {
    let mean = rate * 2.0 * half_len;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    (0..n as usize)
        .map(|_| rng.random_range(-half_len..=half_len))
        .collect()
}

/// Thinned Poisson process on both roads: Poisson counts with mean
/// `p_I λ 2R`, then uniform positions.
pub fn sample_realization<R: Rng + ?Sized>(roads: &RoadNetwork, rng: &mut R) -> PppRealization {
    let x = sample_road(roads.half_len_x, roads.tx_prob * roads.intensity_x, rng);
    let y = sample_road(roads.half_len_y, roads.tx_prob * roads.intensity_y, rng);
    PppRealization {
        interferers_x: x,
        interferers_y: y,
    }
}

/// Per-link constants shared by all realizations.
#[derive(Clone, Copy, Debug)]
struct LinkKernel {
    model: PathLossModel,
    rx: Position,
    beta_prime: f64,
    gamma0: f64,
}

impl LinkKernel {
    fn new(s: &Scenario, link: &Link) -> Result<Self> {
        Ok(LinkKernel {
            model: s.channel.model(),
            rx: link.rx,
            beta_prime: beta_prime(s, link)?,
            gamma0: s.radio.gamma0(),
        })
    }

    /// Interferer gain; a node on top of the receiver drowns it.
    fn gain(&self, p: Position) -> Result<f64> {
        match self.model.gain(p, self.rx) {
            Err(Error::ZeroDistance) => Ok(f64::INFINITY),
            other => other,
        }
    }

    fn exact(&self, real: &PppRealization) -> Result<f64> {
        let mut p = (-self.beta_prime * self.gamma0).exp();
        for x in real.positions() {
            p /= 1.0 + self.beta_prime * self.gain(x)?;
        }
        Ok(p)
    }

    fn fading<R: Rng + ?Sized>(&self, real: &PppRealization, n_f: usize, rng: &mut R) -> Result<f64> {
        let gains = real.positions().map(|x| self.gain(x)).collect::<Result<Vec<_>>>()?;
        let mut hits = 0usize;
        for _ in 0..n_f {
            let h0: f64 = Exp1.sample(rng);
            let mut interference = 0.0;
            for g in &gains {
                let h: f64 = Exp1.sample(rng);
                interference += g * h;
            }
            // SINR ≥ β  ⇔  h₀ ≥ β′(I + γ₀)
            if h0 >= self.beta_prime * (interference + self.gamma0) {
                hits += 1;
            }
        }
        Ok(hits as f64 / n_f as f64)
    }
}

/// Success probability of `link` averaged over Rayleigh fading only, given
/// the interferer positions.
pub fn conditional_success_exact(real: &PppRealization, s: &Scenario, link: &Link) -> Result<f64> {
    LinkKernel::new(s, link)?.exact(real)
}

/// Fraction of `n_f` joint fading draws in which the SINR reaches the threshold.
pub fn conditional_success_fading<R: Rng + ?Sized>(
    real: &PppRealization,
    s: &Scenario,
    link: &Link,
    n_f: usize,
    rng: &mut R,
) -> Result<f64> {
    if n_f == 0 {
        return Err(invalid("n_f", "need at least one fading draw"));
    }
    LinkKernel::new(s, link)?.fading(real, n_f, rng)
}

/// How a realization's conditional success probability is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    /// Closed-form average over Rayleigh fading.
    Exact,
    /// `n_f` sampled fading draws per realization.
    Fading { n_f: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaConfig {
    pub n_ppp: usize,
    pub mode: Mode,
    pub n_bins: usize,
    pub master_seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            n_ppp: 2000,
            mode: Mode::Exact,
            n_bins: 150,
            master_seed: 0,
            execution: Execution::default(),
        }
    }
}

impl MetaConfig {
    fn check(&self) -> Result<()> {
        if self.n_ppp == 0 {
            return Err(invalid("n_ppp", "need at least one realization"));
        }
        if self.n_bins == 0 {
            return Err(invalid("n_bins", "need at least one histogram bin"));
        }
        if let Mode::Fading { n_f: 0 } = self.mode {
            return Err(invalid("n_f", "need at least one fading draw"));
        }
        Ok(())
    }
}

/// Method-of-moments beta parameters, or `None` for a degenerate sample.
pub fn beta_fit(moment1: f64, moment2: f64) -> Option<(f64, f64)> {
    let var = moment2 - moment1 * moment1;
    // below the rounding floor of m₂ − m₁² the sample is constant
    let floor = 8.0 * f64::EPSILON * moment2;
    if !(moment1 > 0.0 && moment1 < 1.0 && var > floor && moment2 < moment1) {
        return None;
    }
    let a = moment1 * (moment1 - moment2) / var;
    let b = a * (1.0 - moment1) / moment1;
    Some((a, b))
}

/// Mass of the outage distribution at the extremes versus around its mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bimodality {
    /// Fraction with outage below 0.05.
    pub low: f64,
    /// Fraction with outage above twice the tolerated outage `1 − target`.
    pub high: f64,
    /// Fraction within ±0.05 of the mean outage.
    pub near_mean: f64,
}

impl Bimodality {
    pub fn holds(&self) -> bool {
        self.low + self.high > self.near_mean
    }
}

/// Empirical meta distribution from per-realization success probabilities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetaEstimate {
    pub samples: Vec<f64>,
    /// Counts of `samples` in equal bins over `[0, 1]`.
    pub histogram: Vec<u64>,
    pub moment1: f64,
    pub moment2: f64,
}

impl MetaEstimate {
    pub fn from_samples(samples: Vec<f64>, n_bins: usize) -> Self {
        let n = samples.len() as f64;
        let mut histogram = vec![0u64; n_bins.max(1)];
        let last = histogram.len() - 1;
        for &p in &samples {
            let b = ((p * histogram.len() as f64) as usize).min(last);
            histogram[b] += 1;
        }
        let moment1 = compensated_sum(samples.iter().copied()) / n;
        let moment2 = compensated_sum(samples.iter().map(|p| p * p)) / n;
        MetaEstimate {
            samples,
            histogram,
            moment1,
            moment2,
        }
    }

    pub fn n_ppp(&self) -> usize {
        self.samples.len()
    }

    /// Fraction of realizations whose success probability is at least `p`.
    pub fn cdf_at(&self, p: f64) -> f64 {
        let hit = self.samples.iter().filter(|&&x| x >= p).count();
        hit as f64 / self.samples.len() as f64
    }

    pub fn mean_outage(&self) -> f64 {
        1.0 - self.moment1
    }

    pub fn variance(&self) -> f64 {
        let n = self.samples.len() as f64;
        let m = self.moment1;
        if n < 2.0 {
            return 0.0;
        }
        compensated_sum(self.samples.iter().map(|p| (p - m) * (p - m))) / (n - 1.0)
    }

    /// Standard error of `moment1`.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.samples.len() as f64).sqrt()
    }

    pub fn bin_edges(&self, bin: usize) -> (f64, f64) {
        let n = self.histogram.len() as f64;
        (bin as f64 / n, (bin + 1) as f64 / n)
    }

    pub fn beta_params(&self) -> Option<(f64, f64)> {
        beta_fit(self.moment1, self.moment2)
    }

    /// Kolmogorov–Smirnov distance between the samples and the fitted beta law.
    pub fn ks_beta(&self) -> Option<f64> {
        let (a, b) = self.beta_params()?;
        let law = Beta::new(a, b).ok()?;
        let mut sorted = self.samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let d = sorted.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
            let f = law.cdf(x);
            d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
        });
        Some(d)
    }

    pub fn bimodality(&self, target: f64) -> Bimodality {
        let n = self.samples.len() as f64;
        let mean = self.mean_outage();
        let frac = |pred: &dyn Fn(f64) -> bool| self.samples.iter().filter(|&&p| pred(1.0 - p)).count() as f64 / n;
        Bimodality {
            low: frac(&|o| o < 0.05),
            high: frac(&|o| o > 2.0 * (1.0 - target)),
            near_mean: frac(&|o| (o - mean).abs() <= 0.05),
        }
    }
}

fn evaluate(
    kernel: &LinkKernel,
    real: &PppRealization,
    mode: Mode,
    master_seed: u64,
    index: u64,
    sub: u64,
) -> Result<f64> {
    match mode {
        Mode::Exact => kernel.exact(real),
        Mode::Fading { n_f } => kernel.fading(real, n_f, &mut fading_rng(master_seed, index, sub)),
    }
}

/// Conditional success probabilities of `link` over `n_ppp` independent
/// traffic realizations.
pub fn meta_distribution(s: &Scenario, link: &Link, cfg: &MetaConfig) -> Result<MetaEstimate> {
    cfg.check()?;
    let s = s.validated()?;
    let kernel = LinkKernel::new(&s, link)?;
    let samples = cfg
        .execution
        .map(cfg.n_ppp, |i| {
            let real = sample_realization(&s.roads, &mut realization_rng(cfg.master_seed, i as u64));
            evaluate(&kernel, &real, cfg.mode, cfg.master_seed, i as u64, 0)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(MetaEstimate::from_samples(samples, cfg.n_bins))
}

/// Per-realization success curves along the transmitter walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FineGrained {
    pub separations: Vec<f64>,
    /// `success[r][k]`: realization `r`, transmitter position `k`.
    pub success: Vec<Vec<f64>>,
    pub estimates: Vec<MetaEstimate>,
    /// Position whose success probability sorts realizations into the
    /// target-meeting and target-missing groups.
    pub group_position: usize,
    pub meets_target: Vec<bool>,
}

impl FineGrained {
    pub fn outage(&self, realization: usize, position: usize) -> f64 {
        1.0 - self.success[realization][position]
    }

    /// Mean outage at `position` of the realizations meeting and missing the
    /// target; NaN for an empty group.
    pub fn conditional_means(&self, position: usize) -> (f64, f64) {
        let mut good = Vec::new();
        let mut bad = Vec::new();
        for (row, &ok) in self.success.iter().zip(&self.meets_target) {
            let o = 1.0 - row[position];
            if ok { good.push(o) } else { bad.push(o) }
        }
        let mean = |v: &[f64]| {
            if v.is_empty() {
                f64::NAN
            } else {
                compensated_sum(v.iter().copied()) / v.len() as f64
            }
        };
        (mean(&good), mean(&bad))
    }
}

/// Sweep parameters: receiver at `-rx_dist`, `m_e` transmitter positions up
/// to Manhattan separation `d_max`, realizations grouped by whether they meet
/// `target` at the position closest to `d_target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGeometry {
    pub rx_dist: f64,
    pub d_max: f64,
    pub m_e: usize,
    pub d_target: f64,
    pub target: f64,
}

impl SweepGeometry {
    pub fn separations(&self) -> Vec<f64> {
        (1..=self.m_e).map(|k| k as f64 * self.d_max / self.m_e as f64).collect()
    }

    pub fn links(&self) -> Result<Vec<Link>> {
        let rx = Position::OnHorizontal(-self.rx_dist);
        (1..=self.m_e)
            .map(|k| Link::new(tx_grid(k, self.m_e, self.d_max, self.rx_dist)?, rx))
            .collect()
    }
}

/// Every realization is evaluated at all transmitter positions, so each row
/// of the result is one fine-grained outage curve.
pub fn fine_grained_sweep(s: &Scenario, geom: &SweepGeometry, cfg: &MetaConfig) -> Result<FineGrained> {
    cfg.check()?;
    let s = s.validated()?;
    let separations = geom.separations();
    let kernels = geom
        .links()?
        .iter()
        .map(|l| LinkKernel::new(&s, l))
        .collect::<Result<Vec<_>>>()?;

    let success = cfg
        .execution
        .map(cfg.n_ppp, |i| {
            let real = sample_realization(&s.roads, &mut realization_rng(cfg.master_seed, i as u64));
            kernels
                .iter()
                .enumerate()
                .map(|(k, kernel)| evaluate(kernel, &real, cfg.mode, cfg.master_seed, i as u64, k as u64))
                .collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let estimates = (0..separations.len())
        .map(|k| MetaEstimate::from_samples(success.iter().map(|row| row[k]).collect(), cfg.n_bins))
        .collect();
    let group_position = separations
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - geom.d_target).abs().total_cmp(&(b.1 - geom.d_target).abs()))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let meets_target = success.iter().map(|row| row[group_position] >= geom.target).collect();
    Ok(FineGrained {
        separations,
        success,
        estimates,
        group_position,
        meets_target,
    })
}
