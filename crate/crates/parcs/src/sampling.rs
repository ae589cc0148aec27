//! Isotropic sensing-row distributions and the stacked multi-sensor
//! measurement operators.
//!
//! Distinct sampling draws each sensor's rows independently and stacks
//! `A = (1/sqrt(m)) [A_1; ...; A_C]` with `A_c` rows `a* = atilde* H_c`.
//! Identical sampling shares one row block `Atilde` across sensors and
//! stacks `A = sqrt(C/m) [Atilde H_1; ...; Atilde H_C]`.
//!
//! Operators are dense at desk scale and switch to seeded row regeneration
//! above `DENSE_LIMIT` columns; both forms expose the same matrix-free
//! apply/adjoint interface.

use crate::dense;
use crate::error::{Error, Result};
use crate::operator::{check_len, LinearOperator};
use crate::profiles::{Scenario, SensorProfileSet};
use crate::rng;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Dimensions up to which assembled operators are stored densely.
pub const DENSE_LIMIT: usize = 4096;

/// Sensing-row law. All laws are isotropic: `E(a a*) = I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowLaw {
    /// Real standard gaussian entries; subgaussian parameter 1/2, unbounded
    /// sup-norm (no finite coherence).
    Gaussian,
    /// Independent +-1 signs; subgaussian parameter 1/2, coherence 1.
    BernoulliPm1,
    /// `sqrt(N)`-scaled rows of the unitary DFT at a uniform frequency;
    /// unit-modulus entries, coherence 1.
    SubsampledDft,
    /// Random-sign diagonal followed by a subsampled DFT row; unit-modulus
    /// entries, coherence 1.
    RandomConvolution,
}

/// A row distribution over `C^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDistribution {
    pub law: RowLaw,
    pub n: usize,
}

impl RowDistribution {
    pub fn new(law: RowLaw, n: usize) -> Self {
        Self { law, n }
    }

    /// Subgaussian parameter alpha of `<a, x>` for unit `x`, from the
    /// moment-generating bound `E exp(theta Z) <= exp(alpha theta^2)`.
    /// Defined for the real subgaussian laws.
    pub fn subgaussian_alpha(&self) -> Option<f64> {
        match self.law {
            RowLaw::Gaussian | RowLaw::BernoulliPm1 => Some(0.5),
            _ => None,
        }
    }

    /// Coherence `mu(G)`: the almost-sure bound on `||a||_inf^2`. None for
    /// the gaussian law (unbounded).
    pub fn coherence(&self) -> Option<f64> {
        match self.law {
            RowLaw::Gaussian => None,
            RowLaw::BernoulliPm1 | RowLaw::SubsampledDft | RowLaw::RandomConvolution => Some(1.0),
        }
    }

    /// Non-rigorous high-probability stand-in for the gaussian sup-norm:
    /// `2 log(2 N m)` bounds every entry squared except with probability
    /// about `1/(N m)`. Only used when explicitly requested, and flagged as
    /// a proxy wherever it propagates.
    pub fn coherence_proxy(&self, m: usize) -> f64 {
        2.0 * (2.0 * (self.n as f64) * (m.max(1) as f64)).ln()
    }

    /// Draw one row into `out` from the given stream.
    pub fn draw_row_into(&self, rng: &mut ChaCha8Rng, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), self.n);
        let n = self.n;
        match self.law {
            RowLaw::Gaussian => {
                for v in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v = Complex64::new(g, 0.0);
                }
            }
            RowLaw::BernoulliPm1 => {
                for v in out.iter_mut() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *v = Complex64::new(sign, 0.0);
                }
            }
            RowLaw::SubsampledDft => {
                let k = rng.random_range(0..n);
                for (j, v) in out.iter_mut().enumerate() {
                    let theta = std::f64::consts::TAU * (k as f64) * (j as f64) / (n as f64);
                    *v = Complex64::from_polar(1.0, theta);
                }
            }
            RowLaw::RandomConvolution => {
                let k = rng.random_range(0..n);
                for (j, v) in out.iter_mut().enumerate() {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let theta = std::f64::consts::TAU * (k as f64) * (j as f64) / (n as f64);
                    *v = Complex64::from_polar(sign, theta);
                }
            }
        }
    }
}

/// Draw `count` i.i.d. rows; row `i` comes from the substream `[i]` of
/// `seed`, so stacks are reproducible and order-independent.
pub fn draw_rows(dist: &RowDistribution, count: usize, seed: u64) -> Result<Array2<Complex64>> {
    if count == 0 {
        return Err(Error::Config("draw_rows: count must be >= 1".into()));
    }
    let mut rows = Array2::zeros((count, dist.n));
    for i in 0..count {
        let mut rng = rng::stream(seed, &[i as u64]);
        dist.draw_row_into(&mut rng, rows.row_mut(i).as_slice_mut().unwrap());
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoragePolicy {
    /// Dense up to [`DENSE_LIMIT`] columns, seeded regeneration above.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

#[derive(Debug, Clone)]
enum Storage {
    /// Per-sensor blocks with rows `atilde* H_c`, scaling not folded in.
    Dense(Vec<Array2<Complex64>>),
    /// Rows are regenerated from their substreams on every application.
    Seeded,
}

/// The assembled stacked measurement operator.
#[derive(Debug, Clone)]
pub struct MeasurementOperator {
    scenario: Scenario,
    profiles: SensorProfileSet,
    laws: Vec<RowDistribution>,
    m: usize,
    seed: u64,
    scale: f64,
    storage: Storage,
}

impl MeasurementOperator {
    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn profiles(&self) -> &SensorProfileSet {
        &self.profiles
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.profiles.n()
    }

    pub fn c(&self) -> usize {
        self.profiles.c()
    }

    /// Rows per sensor, `m / C`.
    pub fn rows_per_sensor(&self) -> usize {
        self.m / self.c()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Global scaling factor: `1/sqrt(m)` (distinct) or `sqrt(C/m)`
    /// (identical).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn laws(&self) -> &[RowDistribution] {
        &self.laws
    }

    /// The dense block of sensor `c` (without the global scaling), when the
    /// operator is stored densely.
    pub fn dense_block(&self, c: usize) -> Option<&Array2<Complex64>> {
        match &self.storage {
            Storage::Dense(blocks) => blocks.get(c),
            Storage::Seeded => None,
        }
    }

    fn law_for_sensor(&self, c: usize) -> &RowDistribution {
        if self.laws.len() == 1 {
            &self.laws[0]
        } else {
            &self.laws[c]
        }
    }

    /// Row substream for (sensor, row). Identical sampling shares streams
    /// across sensors.
    fn row_stream(&self, sensor: usize, row: usize) -> ChaCha8Rng {
        let sensor_tag = match self.scenario {
            Scenario::Distinct => sensor as u64,
            Scenario::Identical => 0,
        };
        rng::stream(self.seed, &[sensor_tag, row as u64])
    }
}

fn build_dense_blocks(
    profiles: &SensorProfileSet,
    laws: &[RowDistribution],
    m_c: usize,
    seed: u64,
    scenario: Scenario,
) -> Result<Vec<Array2<Complex64>>> {
    let c = profiles.c();
    let n = profiles.n();
    let mut blocks = Vec::with_capacity(c);
    let mut atilde = vec![Complex64::ZERO; n];
    for sensor in 0..c {
        let law = if laws.len() == 1 { &laws[0] } else { &laws[sensor] };
        let mut block = Array2::zeros((m_c, n));
        for i in 0..m_c {
            let sensor_tag = match scenario {
                Scenario::Distinct => sensor as u64,
                Scenario::Identical => 0,
            };
            let mut stream = rng::stream(seed, &[sensor_tag, i as u64]);
            law.draw_row_into(&mut stream, &mut atilde);
            // block row = atilde* H_c = conj(H_c^* atilde)
            let v = profiles.apply_adjoint(sensor, &Array1::from(atilde.clone()))?;
            let mut row = block.row_mut(i);
            for (dst, z) in row.iter_mut().zip(v.iter()) {
                *dst = z.conj();
            }
        }
        blocks.push(block);
    }
    Ok(blocks)
}

fn assemble(
    profiles: &SensorProfileSet,
    laws: Vec<RowDistribution>,
    m: usize,
    seed: u64,
    scenario: Scenario,
    policy: StoragePolicy,
) -> Result<MeasurementOperator> {
    let c = profiles.c();
    let n = profiles.n();
    if profiles.scenario() != scenario {
        return Err(Error::ScenarioMismatch {
            expected: scenario,
            found: profiles.scenario(),
        });
    }
    if m == 0 || m % c != 0 {
        return Err(Error::Config(format!(
            "m={m} must be a positive multiple of C={c}"
        )));
    }
    for law in &laws {
        if law.n != n {
            return Err(Error::Dimension(format!(
                "row law dimension {} vs profile N={n}",
                law.n
            )));
        }
    }
    let scale = match scenario {
        Scenario::Distinct => 1.0 / (m as f64).sqrt(),
        Scenario::Identical => (c as f64 / m as f64).sqrt(),
    };
    let dense = match policy {
        StoragePolicy::Dense => true,
        StoragePolicy::MatrixFree => false,
        StoragePolicy::Auto => n <= DENSE_LIMIT,
    };
    let storage = if dense {
        Storage::Dense(build_dense_blocks(profiles, &laws, m / c, seed, scenario)?)
    } else {
        Storage::Seeded
    };
    Ok(MeasurementOperator {
        scenario,
        profiles: profiles.clone(),
        laws,
        m,
        seed,
        scale,
        storage,
    })
}

/// Assemble the distinct-sampling operator: per-sensor independent rows,
/// block `c` holds rows `atilde* H_c`, global scaling `1/sqrt(m)`.
///
/// `dists` gives one law per sensor, or a single law shared by all sensors.
pub fn assemble_distinct(
    profiles: &SensorProfileSet,
    dists: &[RowDistribution],
    m: usize,
    seed: u64,
) -> Result<MeasurementOperator> {
    assemble_distinct_with_policy(profiles, dists, m, seed, StoragePolicy::Auto)
}

pub fn assemble_distinct_with_policy(
    profiles: &SensorProfileSet,
    dists: &[RowDistribution],
    m: usize,
    seed: u64,
    policy: StoragePolicy,
) -> Result<MeasurementOperator> {
    if dists.is_empty() || (dists.len() != 1 && dists.len() != profiles.c()) {
        return Err(Error::Config(format!(
            "expected 1 or C={} row distributions, got {}",
            profiles.c(),
            dists.len()
        )));
    }
    assemble(profiles, dists.to_vec(), m, seed, Scenario::Distinct, policy)
}

/// Assemble the identical-sampling operator: one shared row block, block `c`
/// equals `Atilde H_c`, global scaling `sqrt(C/m)`.
pub fn assemble_identical(
    profiles: &SensorProfileSet,
    dist: &RowDistribution,
    m: usize,
    seed: u64,
) -> Result<MeasurementOperator> {
    assemble_identical_with_policy(profiles, dist, m, seed, StoragePolicy::Auto)
}

pub fn assemble_identical_with_policy(
    profiles: &SensorProfileSet,
    dist: &RowDistribution,
    m: usize,
    seed: u64,
    policy: StoragePolicy,
) -> Result<MeasurementOperator> {
    assemble(profiles, vec![*dist], m, seed, Scenario::Identical, policy)
}

impl LinearOperator for MeasurementOperator {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.cols(), x.len(), "apply input")?;
        let m_c = self.rows_per_sensor();
        let mut y = Array1::zeros(self.m);
        match &self.storage {
            Storage::Dense(blocks) => {
                for (sensor, block) in blocks.iter().enumerate() {
                    let yc = dense::matvec(block, x);
                    for i in 0..m_c {
                        y[sensor * m_c + i] = yc[i] * self.scale;
                    }
                }
            }
            Storage::Seeded => {
                let mut atilde = vec![Complex64::ZERO; self.n()];
                for sensor in 0..self.c() {
                    let hx = self.profiles.apply(sensor, x)?;
                    let hxs = hx.as_slice().unwrap();
                    let law = self.law_for_sensor(sensor);
                    for i in 0..m_c {
                        let mut stream = self.row_stream(sensor, i);
                        law.draw_row_into(&mut stream, &mut atilde);
                        y[sensor * m_c + i] = dense::dot_conj(&atilde, hxs) * self.scale;
                    }
                }
            }
        }
        Ok(y)
    }

    fn adjoint_apply(&self, y: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.rows(), y.len(), "adjoint input")?;
        let m_c = self.rows_per_sensor();
        let n = self.n();
        let mut out = Array1::<Complex64>::zeros(n);
        match &self.storage {
            Storage::Dense(blocks) => {
                for (sensor, block) in blocks.iter().enumerate() {
                    let yc = Array1::from_iter((0..m_c).map(|i| y[sensor * m_c + i]));
                    let xc = dense::adjoint_matvec(block, &yc);
                    for j in 0..n {
                        out[j] += xc[j] * self.scale;
                    }
                }
            }
            Storage::Seeded => {
                let mut atilde = vec![Complex64::ZERO; n];
                for sensor in 0..self.c() {
                    // v_c = sum_i y_{c,i} atilde_{c,i}, then H_c^* v_c
                    let mut v = Array1::<Complex64>::zeros(n);
                    let law = self.law_for_sensor(sensor);
                    for i in 0..m_c {
                        let mut stream = self.row_stream(sensor, i);
                        law.draw_row_into(&mut stream, &mut atilde);
                        let yi = y[sensor * m_c + i];
                        for (acc, a) in v.iter_mut().zip(&atilde) {
                            *acc += a * yi;
                        }
                    }
                    let hv = self.profiles.apply_adjoint(sensor, &v)?;
                    for j in 0..n {
                        out[j] += hv[j] * self.scale;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Serializable description of an operator (spec, not entries): enough to
/// reassemble it bit-identically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub scenario: Scenario,
    pub law: RowLaw,
    pub m: usize,
    pub seed: u64,
    pub profiles: SensorProfileSet,
}

impl OperatorSpec {
    pub fn new(
        scenario: Scenario,
        law: RowLaw,
        m: usize,
        seed: u64,
        profiles: SensorProfileSet,
    ) -> Self {
        Self {
            scenario,
            law,
            m,
            seed,
            profiles,
        }
    }

    pub fn assemble(&self) -> Result<MeasurementOperator> {
        self.assemble_seeded(self.seed)
    }

    /// Assemble with a different seed (fresh trial draws).
    pub fn assemble_seeded(&self, seed: u64) -> Result<MeasurementOperator> {
        let dist = RowDistribution::new(self.law, self.profiles.n());
        match self.scenario {
            Scenario::Distinct => assemble_distinct(&self.profiles, &[dist], self.m, seed),
            Scenario::Identical => assemble_identical(&self.profiles, &dist, self.m, seed),
        }
    }
}

/// Orthogonal sparsifying transforms for recovery in a transform domain.
#[derive(Debug, Clone)]
pub enum OrthogonalTransform {
    Identity,
    /// Orthonormal DCT-II.
    Dct,
    /// Orthonormal Haar stages; requires a power-of-two dimension.
    Haar,
    /// Explicit unitary matrix.
    Custom(Array2<Complex64>),
}

impl OrthogonalTransform {
    pub fn apply(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        match self {
            OrthogonalTransform::Identity => x.clone(),
            OrthogonalTransform::Dct => dct2(x, false),
            OrthogonalTransform::Haar => haar(x, false),
            OrthogonalTransform::Custom(u) => dense::matvec(u, x),
        }
    }

    pub fn apply_adjoint(&self, x: &Array1<Complex64>) -> Array1<Complex64> {
        match self {
            OrthogonalTransform::Identity => x.clone(),
            OrthogonalTransform::Dct => dct2(x, true),
            OrthogonalTransform::Haar => haar(x, true),
            OrthogonalTransform::Custom(u) => dense::adjoint_matvec(u, x),
        }
    }
}

/// Orthonormal DCT-II (or its adjoint/inverse DCT-III when `adjoint`).
fn dct2(x: &Array1<Complex64>, adjoint: bool) -> Array1<Complex64> {
    let n = x.len();
    let nf = n as f64;
    let mut out = Array1::zeros(n);
    for k in 0..n {
        let mut acc = Complex64::ZERO;
        for j in 0..n {
            let (row, col) = if adjoint { (j, k) } else { (k, j) };
            let alpha = if row == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            let w = alpha
                * (std::f64::consts::PI * (col as f64 + 0.5) * row as f64 / nf).cos();
            acc += x[j] * w;
        }
        out[k] = acc;
    }
    out
}

/// Orthonormal Haar transform (full depth); inverse when `adjoint`.
fn haar(x: &Array1<Complex64>, adjoint: bool) -> Array1<Complex64> {
    let n = x.len();
    assert!(n.is_power_of_two(), "haar requires power-of-two length");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut buf: Vec<Complex64> = x.to_vec();
    if !adjoint {
        let mut len = n;
        while len > 1 {
            let half = len / 2;
            let mut tmp = buf[..len].to_vec();
            for i in 0..half {
                tmp[i] = (buf[2 * i] + buf[2 * i + 1]) * s;
                tmp[half + i] = (buf[2 * i] - buf[2 * i + 1]) * s;
            }
            buf[..len].copy_from_slice(&tmp);
            len = half;
        }
    } else {
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let mut tmp = buf[..len].to_vec();
            for i in 0..half {
                tmp[2 * i] = (buf[i] + buf[half + i]) * s;
                tmp[2 * i + 1] = (buf[i] - buf[half + i]) * s;
            }
            buf[..len].copy_from_slice(&tmp);
            len *= 2;
        }
    }
    Array1::from(buf)
}

/// The composed operator `A U` for recovery of transform-sparse signals.
#[derive(Debug, Clone)]
pub struct TransformedOperator {
    inner: MeasurementOperator,
    transform: OrthogonalTransform,
}

impl TransformedOperator {
    pub fn transform(&self) -> &OrthogonalTransform {
        &self.transform
    }

    pub fn inner(&self) -> &MeasurementOperator {
        &self.inner
    }
}

/// Compose `A U` after checking `U* U = I` on random probe vectors
/// (tolerance 1e-8).
pub fn sparsify_in_transform(
    op: MeasurementOperator,
    transform: OrthogonalTransform,
) -> Result<TransformedOperator> {
    let n = op.cols();
    if let OrthogonalTransform::Custom(u) = &transform {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::Dimension(format!(
                "transform is {}x{}, expected {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
    }
    if matches!(transform, OrthogonalTransform::Haar) && !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "haar transform requires power-of-two N, got {n}"
        )));
    }
    let mut rng = rng::stream(0xa5a5, &[n as u64]);
    for _ in 0..3 {
        let x = Array1::from_iter((0..n).map(|_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }));
        let uux = transform.apply_adjoint(&transform.apply(&x));
        let err: f64 = x
            .iter()
            .zip(uux.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = dense::norm2(x.as_slice().unwrap()).max(1e-300);
        if err / scale > 1e-8 {
            return Err(Error::Config(format!(
                "transform fails U*U = I on probe vectors (residual {err:.3e})"
            )));
        }
    }
    Ok(TransformedOperator {
        inner: op,
        transform,
    })
}

impl LinearOperator for TransformedOperator {
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols()
    }

    fn apply(&self, x: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.cols(), x.len(), "apply input")?;
        self.inner.apply(&self.transform.apply(x))
    }

    fn adjoint_apply(&self, y: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        check_len(self.rows(), y.len(), "adjoint input")?;
        Ok(self.transform.apply_adjoint(&self.inner.adjoint_apply(y)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::densify;
    use crate::profiles::{make_profiles, ProfileFamilySpec, ProfileKind};
    use approx::assert_abs_diff_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn identity_profiles(c: usize, n: usize, scenario: Scenario) -> SensorProfileSet {
        let ones = Array1::from_elem(n, c64(1.0, 0.0));
        let vectors: Vec<Array1<Complex64>> = match scenario {
            Scenario::Distinct => (0..c).map(|_| ones.clone()).collect(),
            Scenario::Identical => (0..c)
                .map(|_| ones.mapv(|z| z / (c as f64).sqrt()))
                .collect(),
        };
        SensorProfileSet::from_raw(ProfileKind::Diagonal, scenario, vectors).unwrap()
    }

    #[test]
    fn subsampled_dft_rows_are_unit_modulus() {
        let dist = RowDistribution::new(RowLaw::SubsampledDft, 16);
        let rows = draw_rows(&dist, 32, 7).unwrap();
        for z in rows.iter() {
            assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn draw_rows_deterministic() {
        for law in [
            RowLaw::Gaussian,
            RowLaw::BernoulliPm1,
            RowLaw::SubsampledDft,
            RowLaw::RandomConvolution,
        ] {
            let dist = RowDistribution::new(law, 8);
            let a = draw_rows(&dist, 10, 3).unwrap();
            let b = draw_rows(&dist, 10, 3).unwrap();
            assert_eq!(a, b, "law {law:?} not deterministic");
        }
    }

    #[test]
    fn gaussian_empirical_gram_close_to_identity() {
        let n = 4;
        let trials = 100_000;
        let dist = RowDistribution::new(RowLaw::Gaussian, n);
        let rows = draw_rows(&dist, trials, 2024).unwrap();
        let mut gram = Array2::<Complex64>::zeros((n, n));
        for row in rows.rows() {
            for i in 0..n {
                for j in 0..n {
                    gram[(i, j)] += row[i] * row[j].conj();
                }
            }
        }
        let mut max_dev = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let dev = (gram[(i, j)] / trials as f64
                    - Complex64::new(target, 0.0))
                .norm();
                max_dev = max_dev.max(dev);
            }
        }
        assert!(max_dev <= 0.05, "empirical gram deviation {max_dev}");
    }

    #[test]
    fn assemble_requires_divisible_m() {
        let profiles = identity_profiles(2, 8, Scenario::Distinct);
        let dist = RowDistribution::new(RowLaw::Gaussian, 8);
        assert!(assemble_distinct(&profiles, &[dist], 7, 0).is_err());
        assert!(assemble_distinct(&profiles, &[dist], 8, 0).is_ok());
    }

    #[test]
    fn scenario_mismatch_rejected() {
        let profiles = identity_profiles(2, 8, Scenario::Identical);
        let dist = RowDistribution::new(RowLaw::Gaussian, 8);
        assert!(matches!(
            assemble_distinct(&profiles, &[dist], 8, 0),
            Err(Error::ScenarioMismatch { .. })
        ));
    }

    #[test]
    fn single_sensor_reduces_to_standard_matrix() {
        // C=1, H=I: rows are the raw law rows scaled by 1/sqrt(m)
        let profiles = identity_profiles(1, 8, Scenario::Distinct);
        let dist = RowDistribution::new(RowLaw::Gaussian, 8);
        let op = assemble_distinct(&profiles, &[dist], 4, 5).unwrap();
        let block = op.dense_block(0).unwrap();
        let raw = {
            let mut rng = rng::stream(5, &[0, 0]);
            let mut row = vec![Complex64::ZERO; 8];
            dist.draw_row_into(&mut rng, &mut row);
            row
        };
        for j in 0..8 {
            // conj(conj(atilde)) = atilde for real H = I; gaussian rows are real
            assert_abs_diff_eq!(block[(0, j)].re, raw[j].re, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(op.scale(), 0.5, epsilon = 1e-15);

        // identical C=1 has the same scaling convention
        let profiles_id = identity_profiles(1, 8, Scenario::Identical);
        let op_id = assemble_identical(&profiles_id, &dist, 4, 5).unwrap();
        assert_abs_diff_eq!(op_id.scale(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn distinct_blocks_use_independent_streams() {
        let profiles = identity_profiles(2, 8, Scenario::Distinct);
        let dist = RowDistribution::new(RowLaw::Gaussian, 8);
        let op = assemble_distinct(&profiles, &[dist], 4, 11).unwrap();
        let b0 = op.dense_block(0).unwrap();
        let b1 = op.dense_block(1).unwrap();
        assert_ne!(b0, b1);
    }

    #[test]
    fn identical_blocks_share_rows() {
        // with H_c = I/sqrt(C), blocks must be identical
        let profiles = identity_profiles(2, 8, Scenario::Identical);
        let dist = RowDistribution::new(RowLaw::Gaussian, 8);
        let op = assemble_identical(&profiles, &dist, 4, 11).unwrap();
        let b0 = op.dense_block(0).unwrap();
        let b1 = op.dense_block(1).unwrap();
        for (a, b) in b0.iter().zip(b1.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-14);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn adjoint_identity_holds() {
        let profiles = make_profiles(
            &ProfileFamilySpec::CirculantUnitModulus {
                conjugate_symmetric: false,
            },
            None,
            2,
            16,
            Scenario::Distinct,
            3,
        )
        .unwrap();
        let dist = RowDistribution::new(RowLaw::Gaussian, 16);
        let op = assemble_distinct(&profiles, &[dist], 8, 21).unwrap();
        let mut rng = rng::stream(77, &[0]);
        for _ in 0..5 {
            let x = Array1::from_iter(
                (0..16).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
            );
            let y = Array1::from_iter(
                (0..8).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
            );
            let ax = op.apply(&x).unwrap();
            let aty = op.adjoint_apply(&y).unwrap();
            let lhs = dense::dot_conj(ax.as_slice().unwrap(), y.as_slice().unwrap());
            let rhs = dense::dot_conj(x.as_slice().unwrap(), aty.as_slice().unwrap());
            assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-10);
            assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-10);
        }
        // x = 0 -> y = 0
        let zero = op.apply(&Array1::zeros(16)).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn seeded_storage_matches_dense() {
        let profiles = make_profiles(
            &ProfileFamilySpec::CirculantUnitModulus {
                conjugate_symmetric: false,
            },
            None,
            2,
            16,
            Scenario::Identical,
            13,
        )
        .unwrap();
        let dist = RowDistribution::new(RowLaw::RandomConvolution, 16);
        let dense_op =
            assemble_identical_with_policy(&profiles, &dist, 8, 4, StoragePolicy::Dense).unwrap();
        let free_op = assemble_identical_with_policy(
            &profiles,
            &dist,
            8,
            4,
            StoragePolicy::MatrixFree,
        )
        .unwrap();
        let da = densify(&dense_op).unwrap();
        let db = densify(&free_op).unwrap();
        for (a, b) in da.iter().zip(db.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-10);
        }
        // adjoints agree as well
        let y = Array1::from_iter((0..8).map(|i| c64(i as f64, 1.0 - i as f64)));
        let xa = dense_op.adjoint_apply(&y).unwrap();
        let xb = free_op.adjoint_apply(&y).unwrap();
        for (a, b) in xa.iter().zip(xb.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-10);
            assert_abs_diff_eq!(a.im, b.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn bit_identical_reassembly() {
        let profiles = identity_profiles(2, 8, Scenario::Distinct);
        let spec = OperatorSpec::new(Scenario::Distinct, RowLaw::Gaussian, 8, 99, profiles);
        let a = spec.assemble().unwrap();
        let b = spec.assemble().unwrap();
        assert_eq!(a.dense_block(0).unwrap(), b.dense_block(0).unwrap());
        assert_eq!(a.dense_block(1).unwrap(), b.dense_block(1).unwrap());
    }

    #[test]
    fn transform_composition() {
        let profiles = identity_profiles(1, 16, Scenario::Distinct);
        let dist = RowDistribution::new(RowLaw::Gaussian, 16);
        let op = assemble_distinct(&profiles, &[dist], 8, 1).unwrap();

        // identity leaves the operator unchanged
        let x = Array1::from_iter((0..16).map(|i| c64((i as f64).sin(), (i as f64).cos())));
        let direct = op.apply(&x).unwrap();
        let composed =
            sparsify_in_transform(op.clone(), OrthogonalTransform::Identity).unwrap();
        let via = composed.apply(&x).unwrap();
        for (a, b) in direct.iter().zip(via.iter()) {
            assert_abs_diff_eq!(a.re, b.re, epsilon = 1e-12);
        }

        // DCT and Haar satisfy the adjoint identity through the composition
        for transform in [OrthogonalTransform::Dct, OrthogonalTransform::Haar] {
            let composed = sparsify_in_transform(op.clone(), transform).unwrap();
            let mut rng = rng::stream(8, &[1]);
            let x = Array1::from_iter(
                (0..16).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
            );
            let y = Array1::from_iter(
                (0..8).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
            );
            let ax = composed.apply(&x).unwrap();
            let aty = composed.adjoint_apply(&y).unwrap();
            let lhs = dense::dot_conj(ax.as_slice().unwrap(), y.as_slice().unwrap());
            let rhs = dense::dot_conj(x.as_slice().unwrap(), aty.as_slice().unwrap());
            assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-10);
            assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-10);
        }

        // non-orthogonal custom transform rejected
        let bad = Array2::from_elem((16, 16), c64(0.3, 0.0));
        assert!(sparsify_in_transform(op, OrthogonalTransform::Custom(bad)).is_err());
    }
}
