//! Sensor-profile matrix families: construction, normalization, validation,
//! and application.
//!
//! A profile set holds `C` fixed matrices `H_c` in compact form, either
//! diagonal (the stored vector is the diagonal `h_c`) or circulant (the
//! stored vector is the symbol, i.e. the first column). The distinct
//! scenario requires the joint isometry condition
//! `C^{-1} sum_c H_c^* H_c = I`; the identical scenario requires
//! `sum_c H_c^* H_c = I`. Both Gram sums are diagonal in the profile's
//! natural basis (coordinates for diagonal profiles, Fourier for circulant),
//! so normalization is a per-column or per-eigenvalue rescaling.

use crate::error::{Error, Result};
use crate::fft;
use crate::partition::LevelPartition;
use crate::rng;
use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Distinct,
    Identical,
}

impl Scenario {
    /// The normalization constant M of the profile constructions: 1 for
    /// distinct sampling, C for identical sampling.
    pub fn m_constant(&self, c: usize) -> f64 {
        match self {
            Scenario::Distinct => 1.0,
            Scenario::Identical => c as f64,
        }
    }

    /// Target per-column Gram sum `sum_c |h_{c,i}|^2` under this scenario.
    fn gram_target(&self, c: usize) -> f64 {
        match self {
            Scenario::Distinct => c as f64,
            Scenario::Identical => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Diagonal,
    Circulant,
}

/// Window shape of the banded family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BandWindow {
    /// Raised-cosine (Hann) taper sampled at midpoints, strictly positive.
    #[default]
    RaisedCosine,
    Boxcar,
}

/// Parameters of the built-in profile families.
#[derive(Debug, Clone)]
pub enum ProfileFamilySpec {
    /// `supp(h_c)` restricted to the levels `c - r1 ..= c + r2` (clamped to
    /// the level range; out-of-range levels contribute nothing). Requires
    /// `D == C`.
    Banded {
        r1: usize,
        r2: usize,
        window: BandWindow,
    },
    /// `H_c = sqrt(C/M) sum_d V[c,d] P_{I_d}` for a C x D isometry `V`.
    PiecewiseConstant { v: Array2<Complex64> },
    /// Global oscillatory profiles `h_{c,i} = exp(2 pi i c i / N) / sqrt(M)`
    /// with one-based `c` and `i`.
    Oscillatory,
    /// Circulant profiles with eigenvalues drawn uniformly on the unit
    /// circle (i.i.d. phases; conjugate-symmetric pairing optional, which
    /// makes the symbols real).
    CirculantUnitModulus { conjugate_symmetric: bool },
    /// Explicit vectors, normalized on construction.
    Custom {
        kind: ProfileKind,
        vectors: Vec<Array1<Complex64>>,
    },
}

impl ProfileFamilySpec {
    /// Coherence `mu(V) = max |V[c,d]|^2` of the piecewise-constant isometry.
    pub fn mu_v(&self) -> Option<f64> {
        match self {
            ProfileFamilySpec::PiecewiseConstant { v } => {
                Some(v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max))
            }
            _ => None,
        }
    }
}

/// A set of `C` sensor-profile matrices in compact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSetWire", into = "ProfileSetWire")]
pub struct SensorProfileSet {
    kind: ProfileKind,
    scenario: Scenario,
    vectors: Vec<Array1<Complex64>>,
    /// Circulant eigenvalue stacks `lambda_c = sqrt(N) Phi h_c`, cached at
    /// construction.
    eigenvalues: Option<Vec<Array1<Complex64>>>,
}

impl SensorProfileSet {
    /// Wrap raw vectors without normalizing. The set may violate the joint
    /// isometry condition; use [`SensorProfileSet::normalize_joint_isometry`]
    /// or check with [`SensorProfileSet::verify_joint_isometry`].
    pub fn from_raw(
        kind: ProfileKind,
        scenario: Scenario,
        vectors: Vec<Array1<Complex64>>,
    ) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Config("profile set needs C >= 1 sensors".into()));
        }
        let n = vectors[0].len();
        if n == 0 {
            return Err(Error::Config("profile set needs N >= 1".into()));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension(
                "all profile vectors must have the same length".into(),
            ));
        }
        let eigenvalues = match kind {
            ProfileKind::Diagonal => None,
            ProfileKind::Circulant => Some(
                vectors
                    .iter()
                    .map(|v| Array1::from(fft::circulant_eigenvalues(v.as_slice().unwrap())))
                    .collect(),
            ),
        };
        Ok(Self {
            kind,
            scenario,
            vectors,
            eigenvalues,
        })
    }

    fn from_eigenvalues(
        scenario: Scenario,
        eigenvalues: Vec<Array1<Complex64>>,
    ) -> Result<Self> {
        let vectors = eigenvalues
            .iter()
            .map(|lam| Array1::from(fft::circulant_symbol(lam.as_slice().unwrap())))
            .collect();
        Ok(Self {
            kind: ProfileKind::Circulant,
            scenario,
            vectors,
            eigenvalues: Some(eigenvalues),
        })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    /// Sensor count C.
    pub fn c(&self) -> usize {
        self.vectors.len()
    }

    /// Ambient dimension N.
    pub fn n(&self) -> usize {
        self.vectors[0].len()
    }

    /// The compact vectors: diagonals for diagonal profiles, symbols for
    /// circulant ones.
    pub fn vectors(&self) -> &[Array1<Complex64>] {
        &self.vectors
    }

    pub fn vector(&self, c: usize) -> &Array1<Complex64> {
        &self.vectors[c]
    }

    /// Circulant eigenvalue stacks (None for diagonal profiles).
    pub fn eigenvalues(&self) -> Option<&[Array1<Complex64>]> {
        self.eigenvalues.as_deref()
    }

    /// Largest imaginary magnitude over all stored vectors; a cheap realness
    /// probe for the concentration checks.
    pub fn max_imag(&self) -> f64 {
        self.vectors
            .iter()
            .flat_map(|v| v.iter())
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// The per-basis-column squared stacks `sum_c |.|^2` in the basis where
    /// the Gram sum is diagonal.
    fn gram_stack(&self) -> Vec<f64> {
        let source = match self.kind {
            ProfileKind::Diagonal => &self.vectors,
            ProfileKind::Circulant => self.eigenvalues.as_ref().unwrap(),
        };
        let mut stack = vec![0.0; self.n()];
        for v in source {
            for (acc, z) in stack.iter_mut().zip(v.iter()) {
                *acc += z.norm_sqr();
            }
        }
        stack
    }

    /// Max-entry deviation of the scenario's Gram sum from the identity
    /// (entrywise for diagonal profiles, eigenvalue-wise for circulant).
    pub fn verify_joint_isometry(&self) -> f64 {
        let target = self.scenario.gram_target(self.c());
        self.gram_stack()
            .iter()
            .map(|&s| (s / target - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Rescale each column (diagonal) or eigenvalue stack (circulant) so the
    /// scenario's joint isometry condition holds exactly; directions across
    /// sensors are preserved. Errors when some column stack is zero.
    pub fn normalize_joint_isometry(&self) -> Result<Self> {
        let target = self.scenario.gram_target(self.c());
        let stack = self.gram_stack();
        if let Some(i) = stack.iter().position(|&s| s <= 0.0) {
            return Err(Error::DegenerateProfile(format!(
                "column/eigenvalue stack {i} is zero; no rescaling exists"
            )));
        }
        let scales: Vec<f64> = stack.iter().map(|&s| (target / s).sqrt()).collect();
        match self.kind {
            ProfileKind::Diagonal => {
                let vectors = self
                    .vectors
                    .iter()
                    .map(|v| {
                        Array1::from_iter(
                            v.iter().zip(&scales).map(|(z, &sc)| z * sc),
                        )
                    })
                    .collect();
                Self::from_raw(self.kind, self.scenario, vectors)
            }
            ProfileKind::Circulant => {
                let eigenvalues = self
                    .eigenvalues
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|lam| {
                        Array1::from_iter(
                            lam.iter().zip(&scales).map(|(z, &sc)| z * sc),
                        )
                    })
                    .collect();
                Self::from_eigenvalues(self.scenario, eigenvalues)
            }
        }
    }

    /// Closed-form operator norms per sensor: `(1->1, 2->2)` induced norms.
    ///
    /// Diagonal: both equal `max_i |h_{c,i}|`. Circulant: the 1->1 norm is
    /// the symbol l1 norm and the 2->2 norm is the largest eigenvalue
    /// magnitude `max_k |lambda_{c,k}|`.
    pub fn profile_norms(&self) -> Vec<ProfileNorms> {
        match self.kind {
            ProfileKind::Diagonal => self
                .vectors
                .iter()
                .map(|v| {
                    let sup = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    ProfileNorms {
                        norm_1to1: sup,
                        norm_2to2: sup,
                    }
                })
                .collect(),
            ProfileKind::Circulant => self
                .vectors
                .iter()
                .zip(self.eigenvalues.as_ref().unwrap())
                .map(|(v, lam)| ProfileNorms {
                    norm_1to1: v.iter().map(|z| z.norm()).sum(),
                    norm_2to2: lam.iter().map(|z| z.norm()).fold(0.0, f64::max),
                })
                .collect(),
        }
    }

    /// `max_c ||H_c||_{1->1}^2`, the profile factor of the nonuniform
    /// measurement condition.
    pub fn norm1_max_squared(&self) -> f64 {
        self.profile_norms()
            .iter()
            .map(|n| n.norm_1to1 * n.norm_1to1)
            .fold(0.0, f64::max)
    }

    /// `Xi_dist = max_c ||H_c||_{2->2}^2`, the profile factor of the uniform
    /// measurement condition.
    pub fn xi_dist(&self) -> f64 {
        self.profile_norms()
            .iter()
            .map(|n| n.norm_2to2 * n.norm_2to2)
            .fold(0.0, f64::max)
    }

    /// Apply `H_c` to a vector (entrywise product for diagonal profiles,
    /// cyclic convolution for circulant ones).
    pub fn apply(&self, c: usize, x: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        self.check_apply(c, x)?;
        Ok(match self.kind {
            ProfileKind::Diagonal => Array1::from_iter(
                self.vectors[c].iter().zip(x.iter()).map(|(h, v)| h * v),
            ),
            ProfileKind::Circulant => Array1::from(fft::circulant_apply(
                self.eigenvalues.as_ref().unwrap()[c].as_slice().unwrap(),
                x.as_slice().unwrap(),
            )),
        })
    }

    /// Apply the adjoint `H_c^*`.
    pub fn apply_adjoint(&self, c: usize, x: &Array1<Complex64>) -> Result<Array1<Complex64>> {
        self.check_apply(c, x)?;
        Ok(match self.kind {
            ProfileKind::Diagonal => Array1::from_iter(
                self.vectors[c]
                    .iter()
                    .zip(x.iter())
                    .map(|(h, v)| h.conj() * v),
            ),
            ProfileKind::Circulant => {
                let conj: Vec<Complex64> = self.eigenvalues.as_ref().unwrap()[c]
                    .iter()
                    .map(|z| z.conj())
                    .collect();
                Array1::from(fft::circulant_apply(&conj, x.as_slice().unwrap()))
            }
        })
    }

    fn check_apply(&self, c: usize, x: &Array1<Complex64>) -> Result<()> {
        if c >= self.c() {
            return Err(Error::Dimension(format!(
                "sensor index {c} out of range for C={}",
                self.c()
            )));
        }
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "vector length {} vs N={}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Densify `H_c` (tests and small oracles).
    pub fn densify(&self, c: usize) -> Array2<Complex64> {
        let n = self.n();
        let mut h = Array2::zeros((n, n));
        match self.kind {
            ProfileKind::Diagonal => {
                for i in 0..n {
                    h[(i, i)] = self.vectors[c][i];
                }
            }
            ProfileKind::Circulant => {
                for i in 0..n {
                    for j in 0..n {
                        h[(i, j)] = self.vectors[c][(n + i - j) % n];
                    }
                }
            }
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNorms {
    pub norm_1to1: f64,
    pub norm_2to2: f64,
}

/// Build a profile set from a family specification.
///
/// `partition` is required by the banded and piecewise-constant families and
/// ignored by the rest; `seed` only drives the circulant unit-modulus phase
/// draws. The returned set satisfies the scenario's joint isometry condition
/// (by construction or internal normalization).
pub fn make_profiles(
    spec: &ProfileFamilySpec,
    partition: Option<&LevelPartition>,
    c: usize,
    n: usize,
    scenario: Scenario,
    seed: u64,
) -> Result<SensorProfileSet> {
    if c == 0 || n == 0 {
        return Err(Error::Config("make_profiles: need C >= 1 and N >= 1".into()));
    }
    let m_norm = scenario.m_constant(c).sqrt();
    match spec {
        ProfileFamilySpec::Banded { r1, r2, window } => {
            let partition = partition
                .ok_or_else(|| Error::Config("banded family requires a partition".into()))?;
            if partition.n() != n {
                return Err(Error::Dimension(format!(
                    "partition N={} vs requested N={n}",
                    partition.n()
                )));
            }
            if partition.d() != c {
                return Err(Error::Config(format!(
                    "banded family requires D == C (got D={}, C={c})",
                    partition.d()
                )));
            }
            let mut vectors = Vec::with_capacity(c);
            for sensor in 0..c {
                let lo = sensor.saturating_sub(*r1);
                let hi = (sensor + r2).min(c - 1);
                let mut band: Vec<usize> = (lo..=hi)
                    .flat_map(|d| partition.level(d).iter().copied())
                    .collect();
                band.sort_unstable();
                let width = band.len();
                let mut h = Array1::zeros(n);
                for (pos, &i) in band.iter().enumerate() {
                    let w = match window {
                        BandWindow::RaisedCosine => {
                            let u = std::f64::consts::PI * (pos as f64 + 0.5) / width as f64;
                            u.sin() * u.sin()
                        }
                        BandWindow::Boxcar => 1.0,
                    };
                    h[i] = Complex64::new(w, 0.0);
                }
                vectors.push(h);
            }
            SensorProfileSet::from_raw(ProfileKind::Diagonal, scenario, vectors)?
                .normalize_joint_isometry()
        }
        ProfileFamilySpec::PiecewiseConstant { v } => {
            let partition = partition.ok_or_else(|| {
                Error::Config("piecewise-constant family requires a partition".into())
            })?;
            let d = partition.d();
            if partition.n() != n {
                return Err(Error::Dimension(format!(
                    "partition N={} vs requested N={n}",
                    partition.n()
                )));
            }
            if v.nrows() != c || v.ncols() != d {
                return Err(Error::Dimension(format!(
                    "V is {}x{}, expected C x D = {c}x{d}",
                    v.nrows(),
                    v.ncols()
                )));
            }
            if d > c {
                return Err(Error::Config(format!(
                    "piecewise-constant family requires D <= C (got D={d}, C={c})"
                )));
            }
            // V*V = I to tolerance
            let mut residual = 0.0_f64;
            for a in 0..d {
                for b in 0..d {
                    let mut s = Complex64::ZERO;
                    for row in 0..c {
                        s += v[(row, a)].conj() * v[(row, b)];
                    }
                    let target = if a == b { 1.0 } else { 0.0 };
                    residual = residual.max((s - target).norm());
                }
            }
            if residual > 1e-8 {
                return Err(Error::Config(format!(
                    "V is not an isometry: max |V*V - I| = {residual:.3e}"
                )));
            }
            let level_of = partition.level_of();
            let scale = (c as f64).sqrt() / m_norm; // sqrt(C/M)
            let vectors = (0..c)
                .map(|sensor| {
                    Array1::from_iter((0..n).map(|i| v[(sensor, level_of[i])] * scale))
                })
                .collect();
            SensorProfileSet::from_raw(ProfileKind::Diagonal, scenario, vectors)
        }
        ProfileFamilySpec::Oscillatory => {
            let vectors = (1..=c)
                .map(|sensor| {
                    Array1::from_iter((1..=n).map(|i| {
                        let theta =
                            std::f64::consts::TAU * (sensor as f64) * (i as f64) / (n as f64);
                        Complex64::from_polar(1.0 / m_norm, theta)
                    }))
                })
                .collect();
            SensorProfileSet::from_raw(ProfileKind::Diagonal, scenario, vectors)
        }
        ProfileFamilySpec::CirculantUnitModulus { conjugate_symmetric } => {
            let modulus = 1.0 / m_norm;
            let eigenvalues = (0..c)
                .map(|sensor| {
                    let mut rng = rng::stream(seed, &[0x6369_7263, sensor as u64]);
                    let mut lam = vec![Complex64::ZERO; n];
                    if *conjugate_symmetric {
                        lam[0] = Complex64::new(
                            if rng.random::<bool>() { modulus } else { -modulus },
                            0.0,
                        );
                        for k in 1..=(n / 2) {
                            if 2 * k == n {
                                lam[k] = Complex64::new(
                                    if rng.random::<bool>() { modulus } else { -modulus },
                                    0.0,
                                );
                            } else {
                                let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                                lam[k] = Complex64::from_polar(modulus, theta);
                                lam[n - k] = lam[k].conj();
                            }
                        }
                    } else {
                        for v in lam.iter_mut() {
                            let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                            *v = Complex64::from_polar(modulus, theta);
                        }
                    }
                    Array1::from(lam)
                })
                .collect();
            SensorProfileSet::from_eigenvalues(scenario, eigenvalues)
        }
        ProfileFamilySpec::Custom { kind, vectors } => {
            if vectors.len() != c {
                return Err(Error::Dimension(format!(
                    "custom family has {} vectors, expected C={c}",
                    vectors.len()
                )));
            }
            if vectors.iter().any(|v| v.len() != n) {
                return Err(Error::Dimension(format!(
                    "custom vectors must all have length N={n}"
                )));
            }
            SensorProfileSet::from_raw(*kind, scenario, vectors.clone())?
                .normalize_joint_isometry()
        }
    }
}

/// C x D isometry from the first D columns of the unitary DFT of size C;
/// maximally incoherent, `mu(V) = 1/C`.
pub fn dft_isometry(c: usize, d: usize) -> Result<Array2<Complex64>> {
    if d > c || c == 0 {
        return Err(Error::Config(format!(
            "dft_isometry: need 1 <= D <= C (got C={c}, D={d})"
        )));
    }
    Ok(Array2::from_shape_fn((c, d), |(row, col)| {
        Complex64::from_polar(
            1.0 / (c as f64).sqrt(),
            -std::f64::consts::TAU * row as f64 * col as f64 / c as f64,
        )
    }))
}

/// JSON wire form: `{kind, scenario, C, N, vectors}` with `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct ProfileSetWire {
    kind: ProfileKind,
    scenario: Scenario,
    #[serde(rename = "C")]
    c: usize,
    #[serde(rename = "N")]
    n: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<ProfileSetWire> for SensorProfileSet {
    type Error = Error;

    fn try_from(wire: ProfileSetWire) -> Result<Self> {
        if wire.vectors.len() != wire.c {
            return Err(Error::Dimension(format!(
                "profile JSON: {} vectors but C={}",
                wire.vectors.len(),
                wire.c
            )));
        }
        let vectors: Vec<Array1<Complex64>> = wire
            .vectors
            .into_iter()
            .map(|v| Array1::from_iter(v.into_iter().map(|[re, im]| Complex64::new(re, im))))
            .collect();
        if vectors.iter().any(|v| v.len() != wire.n) {
            return Err(Error::Dimension(format!(
                "profile JSON: vector length differs from N={}",
                wire.n
            )));
        }
        SensorProfileSet::from_raw(wire.kind, wire.scenario, vectors)
    }
}

impl From<SensorProfileSet> for ProfileSetWire {
    fn from(set: SensorProfileSet) -> Self {
        ProfileSetWire {
            kind: set.kind,
            scenario: set.scenario,
            c: set.c(),
            n: set.n(),
            vectors: set
                .vectors
                .iter()
                .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn oscillatory_distinct_is_exact() {
        let set = make_profiles(
            &ProfileFamilySpec::Oscillatory,
            None,
            4,
            8,
            Scenario::Distinct,
            0,
        )
        .unwrap();
        for v in set.vectors() {
            for z in v.iter() {
                assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-14);
            }
        }
        assert!(set.verify_joint_isometry() <= 1e-12);
    }

    #[test]
    fn piecewise_constant_identity_v() {
        let partition = LevelPartition::contiguous(8, 2).unwrap();
        let v = Array2::from_shape_fn((2, 2), |(i, j)| {
            if i == j {
                c64(1.0, 0.0)
            } else {
                c64(0.0, 0.0)
            }
        });
        let set = make_profiles(
            &ProfileFamilySpec::PiecewiseConstant { v },
            Some(&partition),
            2,
            8,
            Scenario::Identical,
            0,
        )
        .unwrap();
        // H_1 = diag(1 on I_1, 0 on I_2), H_2 complementary
        for i in 0..4 {
            assert_abs_diff_eq!(set.vector(0)[i].re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(set.vector(1)[i].norm(), 0.0, epsilon = 1e-14);
        }
        for i in 4..8 {
            assert_abs_diff_eq!(set.vector(0)[i].norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(set.vector(1)[i].re, 1.0, epsilon = 1e-14);
        }
        assert!(set.verify_joint_isometry() <= 1e-12);
    }

    #[test]
    fn piecewise_constant_rejects_non_isometry() {
        let partition = LevelPartition::contiguous(8, 2).unwrap();
        let v = Array2::from_elem((2, 2), c64(1.0, 0.0));
        assert!(make_profiles(
            &ProfileFamilySpec::PiecewiseConstant { v },
            Some(&partition),
            2,
            8,
            Scenario::Distinct,
            0,
        )
        .is_err());
    }

    #[test]
    fn piecewise_constant_rejects_d_greater_than_c() {
        let partition = LevelPartition::contiguous(9, 3).unwrap();
        // 2x3 "isometry" is impossible anyway, but the D <= C check fires first
        let v = Array2::from_elem((2, 3), c64(0.5, 0.0));
        let err = make_profiles(
            &ProfileFamilySpec::PiecewiseConstant { v },
            Some(&partition),
            2,
            9,
            Scenario::Distinct,
            0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn banded_support_is_contained_in_band() {
        let partition = LevelPartition::contiguous(16, 4).unwrap();
        let set = make_profiles(
            &ProfileFamilySpec::Banded {
                r1: 1,
                r2: 1,
                window: BandWindow::RaisedCosine,
            },
            Some(&partition),
            4,
            16,
            Scenario::Distinct,
            0,
        )
        .unwrap();
        assert!(set.verify_joint_isometry() <= 1e-12);
        for sensor in 0..4usize {
            let lo = sensor.saturating_sub(1);
            let hi = (sensor + 1).min(3);
            let allowed: Vec<usize> = (lo..=hi)
                .flat_map(|d| partition.level(d).iter().copied())
                .collect();
            for i in 0..16 {
                let inside = allowed.contains(&i);
                let nonzero = set.vector(sensor)[i].norm() > 0.0;
                assert_eq!(
                    nonzero, inside,
                    "sensor {sensor} index {i}: nonzero={nonzero} inside={inside}"
                );
            }
        }
    }

    #[test]
    fn normalize_simple_cases() {
        // C=1, h = (2,...,2), distinct -> all ones
        let set = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Distinct,
            vec![Array1::from_elem(5, c64(2.0, 0.0))],
        )
        .unwrap()
        .normalize_joint_isometry()
        .unwrap();
        for z in set.vector(0).iter() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-14);
        }

        // C=2, both all-ones, identical -> both 1/sqrt(2)
        let ones = Array1::from_elem(4, c64(1.0, 0.0));
        let set = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Identical,
            vec![ones.clone(), ones],
        )
        .unwrap()
        .normalize_joint_isometry()
        .unwrap();
        for sensor in 0..2 {
            for z in set.vector(sensor).iter() {
                assert_abs_diff_eq!(z.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn normalize_random_diagonal_residual() {
        let mut rng = rng::stream(17, &[1]);
        let vectors: Vec<Array1<Complex64>> = (0..3)
            .map(|_| Array1::from_iter((0..32).map(|_| c64(rng.random::<f64>() + 0.1, 0.0))))
            .collect();
        let set =
            SensorProfileSet::from_raw(ProfileKind::Diagonal, Scenario::Distinct, vectors)
                .unwrap()
                .normalize_joint_isometry()
                .unwrap();
        assert!(set.verify_joint_isometry() <= 1e-12);
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let mut v = Array1::from_elem(4, c64(1.0, 0.0));
        v[2] = Complex64::ZERO;
        let set =
            SensorProfileSet::from_raw(ProfileKind::Diagonal, Scenario::Distinct, vec![v])
                .unwrap();
        assert!(matches!(
            set.normalize_joint_isometry(),
            Err(Error::DegenerateProfile(_))
        ));
    }

    #[test]
    fn verify_identity_and_all_ones() {
        // C=1, H=I, distinct -> 0
        let set = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Distinct,
            vec![Array1::from_elem(6, c64(1.0, 0.0))],
        )
        .unwrap();
        assert_abs_diff_eq!(set.verify_joint_isometry(), 0.0, epsilon = 1e-15);

        // C=2 all-ones: distinct satisfies Eq-(4) exactly (each H_c = I);
        // under the identical convention the Gram sum is 2I, residual 1.
        let ones = Array1::from_elem(6, c64(1.0, 0.0));
        let distinct = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Distinct,
            vec![ones.clone(), ones.clone()],
        )
        .unwrap();
        assert_abs_diff_eq!(distinct.verify_joint_isometry(), 0.0, epsilon = 1e-15);
        let identical = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Identical,
            vec![ones.clone(), ones],
        )
        .unwrap();
        assert_abs_diff_eq!(identical.verify_joint_isometry(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn oscillatory_verify_small() {
        let set = make_profiles(
            &ProfileFamilySpec::Oscillatory,
            None,
            8,
            64,
            Scenario::Distinct,
            0,
        )
        .unwrap();
        assert!(set.verify_joint_isometry() <= 1e-12);
    }

    #[test]
    fn diagonal_norms_closed_form() {
        let set = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Distinct,
            vec![Array1::from(vec![c64(1.0, 0.0), c64(-2.0, 0.0), c64(0.5, 0.0)])],
        )
        .unwrap();
        let norms = set.profile_norms();
        assert_abs_diff_eq!(norms[0].norm_1to1, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(norms[0].norm_2to2, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn circulant_norm_1to1_is_symbol_l1() {
        let set = SensorProfileSet::from_raw(
            ProfileKind::Circulant,
            Scenario::Distinct,
            vec![Array1::from(vec![
                c64(0.5, 0.0),
                c64(0.25, 0.0),
                c64(0.25, 0.0),
                c64(0.0, 0.0),
            ])],
        )
        .unwrap();
        assert_abs_diff_eq!(set.profile_norms()[0].norm_1to1, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_diagonal_and_circulant() {
        let set = SensorProfileSet::from_raw(
            ProfileKind::Diagonal,
            Scenario::Distinct,
            vec![Array1::from(vec![c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0)])],
        )
        .unwrap();
        let x = Array1::from_elem(3, c64(1.0, 0.0));
        let y = set.apply(0, &x).unwrap();
        assert_abs_diff_eq!(y[0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[1].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(y[2].re, 3.0, epsilon = 1e-14);

        // circulant with impulse symbol acts as the identity
        let mut impulse = Array1::from_elem(8, Complex64::ZERO);
        impulse[0] = c64(1.0, 0.0);
        let set = SensorProfileSet::from_raw(
            ProfileKind::Circulant,
            Scenario::Distinct,
            vec![impulse],
        )
        .unwrap();
        let x = Array1::from_iter((0..8).map(|i| c64(i as f64, -(i as f64) * 0.5)));
        let y = set.apply(0, &x).unwrap();
        for i in 0..8 {
            assert_abs_diff_eq!(y[i].re, x[i].re, epsilon = 1e-12);
            assert_abs_diff_eq!(y[i].im, x[i].im, epsilon = 1e-12);
        }

        assert!(set.apply(1, &x).is_err());
        assert!(set.apply(0, &Array1::zeros(4)).is_err());
    }

    #[test]
    fn circulant_apply_matches_dense() {
        let mut rng = rng::stream(5, &[2]);
        let symbol = Array1::from_iter(
            (0..8).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
        );
        let set = SensorProfileSet::from_raw(
            ProfileKind::Circulant,
            Scenario::Distinct,
            vec![symbol],
        )
        .unwrap();
        let x = Array1::from_iter(
            (0..8).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
        );
        let fast = set.apply(0, &x).unwrap();
        let dense = set.densify(0);
        let slow = crate::dense::matvec(&dense, &x);
        for i in 0..8 {
            assert_abs_diff_eq!(fast[i].re, slow[i].re, epsilon = 1e-10);
            assert_abs_diff_eq!(fast[i].im, slow[i].im, epsilon = 1e-10);
        }
        // adjoint identity <Hx, y> = <x, H*y>
        let y = Array1::from_iter(
            (0..8).map(|_| c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
        );
        let hx = set.apply(0, &x).unwrap();
        let hy = set.apply_adjoint(0, &y).unwrap();
        let lhs = crate::dense::dot_conj(hx.as_slice().unwrap(), y.as_slice().unwrap());
        let rhs = crate::dense::dot_conj(x.as_slice().unwrap(), hy.as_slice().unwrap());
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-10);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-10);
    }

    #[test]
    fn circulant_unit_modulus_scenarios_exact() {
        for scenario in [Scenario::Distinct, Scenario::Identical] {
            let set = make_profiles(
                &ProfileFamilySpec::CirculantUnitModulus {
                    conjugate_symmetric: false,
                },
                None,
                4,
                16,
                scenario,
                9,
            )
            .unwrap();
            assert!(set.verify_joint_isometry() <= 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetric_symbols_are_real() {
        let set = make_profiles(
            &ProfileFamilySpec::CirculantUnitModulus {
                conjugate_symmetric: true,
            },
            None,
            2,
            16,
            Scenario::Distinct,
            33,
        )
        .unwrap();
        assert!(set.max_imag() <= 1e-12);
        assert!(set.verify_joint_isometry() <= 1e-12);
    }

    #[test]
    fn built_in_diagonal_sup_norm_bounds() {
        // distinct scenario: 1 <= ||h_c||_inf^2 <= C for the built-in families
        let partition = LevelPartition::contiguous(32, 4).unwrap();
        let specs: Vec<ProfileFamilySpec> = vec![
            ProfileFamilySpec::Banded {
                r1: 1,
                r2: 1,
                window: BandWindow::RaisedCosine,
            },
            ProfileFamilySpec::Oscillatory,
            ProfileFamilySpec::PiecewiseConstant {
                v: dft_isometry(4, 4).unwrap(),
            },
        ];
        for spec in &specs {
            let set =
                make_profiles(spec, Some(&partition), 4, 32, Scenario::Distinct, 3).unwrap();
            for norms in set.profile_norms() {
                let sq = norms.norm_2to2 * norms.norm_2to2;
                assert!(
                    (1.0 - 1e-10..=4.0 + 1e-10).contains(&sq),
                    "sup norm out of [1, C]: {sq}"
                );
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let set = make_profiles(
            &ProfileFamilySpec::CirculantUnitModulus {
                conjugate_symmetric: false,
            },
            None,
            3,
            8,
            Scenario::Identical,
            5,
        )
        .unwrap();
        let json = serde_json::to_string(&set).unwrap();
        assert!(json.contains("\"kind\":\"circulant\""));
        assert!(json.contains("\"C\":3"));
        let back: SensorProfileSet = serde_json::from_str(&json).unwrap();
        assert_eq!(set.kind(), back.kind());
        assert_eq!(set.scenario(), back.scenario());
        for (a, b) in set.vectors().iter().zip(back.vectors()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!(x.re, y.re, epsilon = 0.0);
                assert_abs_diff_eq!(x.im, y.im, epsilon = 0.0);
            }
        }
    }
}
