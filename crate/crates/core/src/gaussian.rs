//! Gaussian states over canonical quadratures.
//!
//! Quadratures are mode-interleaved, `(x₁, p₁, x₂, p₂, …)`, with `[x, p] = i`
//! so that the vacuum covariance is `I/2`. An atomic ensemble polarized along
//! `x` maps onto one mode through `x = J_y/√(ħJ_x)`, `p = J_z/√(ħJ_x)`, and a
//! light pulse through `x_L = S_y/√(ħS_x)`, `p_L = S_z/√(ħS_x)`. Variances
//! quoted in units of `ħJ_x` are therefore plain canonical variances here.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Symmetry tolerance accepted by [`GaussianState::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Slack on the uncertainty relation `ν ≥ 1/2`.
pub const BONA_FIDE_TOL: f64 = 1e-9;
/// Relative singular-value cutoff of the homodyne pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Tolerance used to pair the `±iν` eigenvalues of `Ω·Γ`.
pub const PAIRING_TOL: f64 = 1e-8;

/// The vacuum variance of a single quadrature.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Which quadrature of a mode a homodyne detector reads out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// How the outcome of a homodyne measurement is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Draw from the Gaussian marginal of the measured quadrature.
    Sampled,
    /// Use the supplied value.
    Pinned(f64),
}

/// An affine phase-space map `r ↦ S·r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    s: DMatrix<f64>,
    d: DVector<f64>,
}

impl SymplecticMap {
    pub fn identity(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        SymplecticMap {
            s: DMatrix::identity(dim, dim),
            d: DVector::zeros(dim),
        }
    }

    /// Wraps a matrix and displacement, checking `S·Ω·Sᵀ = Ω` to `tol`.
    pub fn new(s: DMatrix<f64>, d: DVector<f64>, tol: f64) -> Result<Self> {
        if !s.is_square() || !s.nrows().is_multiple_of(2) || s.nrows() == 0 {
            return Err(Error::invalid(format!(
                "symplectic matrix must be square with even dimension, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if d.len() != s.nrows() {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: d.len(),
            });
        }
        let map = SymplecticMap { s, d };
        let err = map.symplectic_error();
        if err.is_nan() || err > tol {
            return Err(Error::invalid(format!(
                "matrix is not symplectic (|SΩSᵀ − Ω| = {err:.3e})"
            )));
        }
        Ok(map)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn n_modes(&self) -> usize {
        self.s.nrows() / 2
    }

    /// Largest entry of `|S·Ω·Sᵀ − Ω|`.
    pub fn symplectic_error(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.s * &omega * self.s.transpose() - omega).amax()
    }

    /// The map that applies `self` first and then `next`.
    pub fn then(&self, next: &SymplecticMap) -> Result<SymplecticMap> {
        if next.s.nrows() != self.s.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.s.nrows(),
                found: next.s.nrows(),
            });
        }
        Ok(SymplecticMap {
            s: &next.s * &self.s,
            d: &next.s * &self.d + &next.d,
        })
    }
}

/// Block-diagonal symplectic form with blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn check_mode(mode: usize, n_modes: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::ModeOutOfRange { mode, n_modes });
    }
    Ok(())
}

/// One passage of a light mode through an atomic mode.
///
/// The light couples to the atomic combination `c = σ·cos α·p_A + sin α·x_A`
/// through its `p_L` quadrature, where `σ = ±1` is the orientation sign of
/// the ensemble:
///
/// ```text
/// x_A' = x_A − κ σ cos α · p_L
/// p_A' = p_A + κ sin α · p_L
/// x_L' = x_L − κ c
/// p_L' = p_L
/// ```
///
/// `c` and `p_L` are both conserved, so passes of one beam through
/// different samples commute.
pub fn qnd_pass_map_oriented(
    n_modes: usize,
    light_mode: usize,
    sample_mode: usize,
    kappa: f64,
    (cos_a, sin_a): (f64, f64),
    orientation_sign: f64,
) -> Result<SymplecticMap> {
    check_mode(light_mode, n_modes)?;
    check_mode(sample_mode, n_modes)?;
    if light_mode == sample_mode {
        return Err(Error::CoincidentModes(light_mode));
    }
    if !kappa.is_finite() || !cos_a.is_finite() || !sin_a.is_finite() {
        return Err(Error::NonFinite("pass parameters"));
    }
    let mut map = SymplecticMap::identity(n_modes);
    let (xa, pa) = (2 * sample_mode, 2 * sample_mode + 1);
    let (xl, pl) = (2 * light_mode, 2 * light_mode + 1);
    let s = &mut map.s;
    s[(xa, pl)] = -kappa * orientation_sign * cos_a;
    s[(pa, pl)] = kappa * sin_a;
    s[(xl, pa)] = -kappa * orientation_sign * cos_a;
    s[(xl, xa)] = -kappa * sin_a;
    Ok(map)
}

/// [`qnd_pass_map_oriented`] for an ensemble polarized along `+x`.
pub fn qnd_pass_map(
    n_modes: usize,
    light_mode: usize,
    sample_mode: usize,
    kappa: f64,
    alpha: f64,
) -> Result<SymplecticMap> {
    qnd_pass_map_oriented(
        n_modes,
        light_mode,
        sample_mode,
        kappa,
        (alpha.cos(), alpha.sin()),
        1.0,
    )
}

/// Phase-space rotation `(x, p) ↦ (x cos θ − p sin θ, x sin θ + p cos θ)`
/// of one mode.
pub fn rotation_map(n_modes: usize, mode: usize, theta: f64) -> Result<SymplecticMap> {
    rotation_map_cs(n_modes, mode, (theta.cos(), theta.sin()))
}

/// [`rotation_map`] from a precomputed `(cos θ, sin θ)`.
pub fn rotation_map_cs(n_modes: usize, mode: usize, (c, s): (f64, f64)) -> Result<SymplecticMap> {
    check_mode(mode, n_modes)?;
    if !c.is_finite() || !s.is_finite() {
        return Err(Error::NonFinite("rotation angle"));
    }
    let mut map = SymplecticMap::identity(n_modes);
    let (x, p) = (2 * mode, 2 * mode + 1);
    map.s[(x, x)] = c;
    map.s[(x, p)] = -s;
    map.s[(p, x)] = s;
    map.s[(p, p)] = c;
    Ok(map)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Mean vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// The `n`-mode vacuum: zero mean, covariance `I/2`.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::NoModes);
        }
        let dim = 2 * n_modes;
        Ok(GaussianState {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * VACUUM_VARIANCE,
        })
    }

    /// Builds a state from explicit moments.
    ///
    /// The covariance must be symmetric to [`SYMMETRY_TOL`] and satisfy the
    /// uncertainty relation to [`BONA_FIDE_TOL`].
    pub fn new(mean: DVector<f64>, mut cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() == 0 {
            return Err(Error::NoModes);
        }
        if !cov.is_square() || !cov.nrows().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "covariance must be square with even dimension, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.len() != cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: cov.nrows(),
                found: mean.len(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state moments"));
        }
        let asym = max_asymmetry(&cov);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric(asym));
        }
        symmetrize(&mut cov);
        let nu_min = symplectic_spectrum(&cov)?[0];
        if nu_min < VACUUM_VARIANCE - BONA_FIDE_TOL {
            return Err(Error::NotBonaFide(nu_min));
        }
        Ok(GaussianState { mean, cov })
    }

    /// Builds a state without the uncertainty-relation check.
    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, mut cov: DMatrix<f64>) -> Self {
        symmetrize(&mut cov);
        GaussianState { mean, cov }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `coeffsᵀ·Γ·coeffs`.
    pub fn variance_of(&self, coeffs: &[f64]) -> Result<f64> {
        self.covariance_of(coeffs, coeffs)
    }

    /// Symmetrized covariance `aᵀ·Γ·b` of two linear combinations.
    pub fn covariance_of(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let dim = self.cov.nrows();
        for v in [a, b] {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let a = DVector::from_column_slice(a);
        let b = DVector::from_column_slice(b);
        Ok(a.dot(&(&self.cov * b)))
    }

    /// Expectation value of a linear combination of quadratures.
    pub fn mean_of(&self, coeffs: &[f64]) -> Result<f64> {
        if coeffs.len() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: coeffs.len(),
            });
        }
        Ok(DVector::from_column_slice(coeffs).dot(&self.mean))
    }

    pub fn apply(&self, map: &SymplecticMap) -> Result<Self> {
        if map.s.nrows() != self.cov.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.cov.nrows(),
                found: map.s.nrows(),
            });
        }
        let mut cov = &map.s * &self.cov * map.s.transpose();
        symmetrize(&mut cov);
        Ok(GaussianState {
            mean: &map.s * &self.mean + &map.d,
            cov,
        })
    }

    pub fn rotate_mode(&self, mode: usize, theta: f64) -> Result<Self> {
        self.apply(&rotation_map(self.n_modes(), mode, theta)?)
    }

    /// Appends `count` vacuum modes after the existing ones.
    pub fn with_vacuum_modes(&self, count: usize) -> Self {
        let dim = self.cov.nrows();
        let new_dim = dim + 2 * count;
        let mut cov = DMatrix::identity(new_dim, new_dim) * VACUUM_VARIANCE;
        cov.view_mut((0, 0), (dim, dim)).copy_from(&self.cov);
        let mut mean = DVector::zeros(new_dim);
        mean.rows_mut(0, dim).copy_from(&self.mean);
        GaussianState { mean, cov }
    }

    /// `self ⊗ other`, with the modes of `other` placed after those of `self`.
    pub fn tensor(&self, other: &GaussianState) -> Self {
        let (da, db) = (self.cov.nrows(), other.cov.nrows());
        let mut cov = DMatrix::zeros(da + db, da + db);
        cov.view_mut((0, 0), (da, da)).copy_from(&self.cov);
        cov.view_mut((da, da), (db, db)).copy_from(&other.cov);
        let mut mean = DVector::zeros(da + db);
        mean.rows_mut(0, da).copy_from(&self.mean);
        mean.rows_mut(da, db).copy_from(&other.mean);
        GaussianState { mean, cov }
    }

    /// Traces out one mode (drops its rows and columns).
    pub fn discard_mode(&self, mode: usize) -> Result<Self> {
        check_mode(mode, self.n_modes())?;
        if self.n_modes() == 1 {
            return Err(Error::NothingToKeep);
        }
        let keep = kept_indices(self.n_modes(), mode);
        Ok(GaussianState {
            mean: select_vec(&self.mean, &keep),
            cov: select_mat(&self.cov, &keep, &keep),
        })
    }

    /// Reduced state of the listed modes, in the given order.
    pub fn reduced(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::NoModes);
        }
        let mut idx = Vec::with_capacity(2 * modes.len());
        for &m in modes {
            check_mode(m, self.n_modes())?;
            idx.extend([2 * m, 2 * m + 1]);
        }
        Ok(GaussianState {
            mean: select_vec(&self.mean, &idx),
            cov: select_mat(&self.cov, &idx, &idx),
        })
    }

    /// Homodyne detection of one quadrature of `mode`, followed by removal
    /// of that mode.
    ///
    /// With the covariance split into the kept block `A`, the measured block
    /// `B` and the cross block `C`, the kept covariance becomes
    /// `A − C (πBπ)⁺ Cᵀ` and the kept mean shifts by
    /// `C (πBπ)⁺ π (r − μ_B)`. The covariance update does not depend on the
    /// outcome. Returns the conditioned state and the outcome used.
    pub fn homodyne_condition<R: Rng + ?Sized>(
        &self,
        mode: usize,
        quadrature: Quadrature,
        outcome: Outcome,
        rng: &mut R,
    ) -> Result<(Self, f64)> {
        check_mode(mode, self.n_modes())?;
        if self.n_modes() < 2 {
            return Err(Error::NothingToKeep);
        }
        let q = 2 * mode + quadrature.offset();
        let prior_mean = self.mean[q];
        let prior_var = self.cov[(q, q)];
        let value = match outcome {
            Outcome::Pinned(v) => {
                if !v.is_finite() {
                    return Err(Error::NonFinite("pinned homodyne outcome"));
                }
                v
            }
            Outcome::Sampled => {
                let sd = prior_var.max(0.0).sqrt();
                if sd > 0.0 {
                    Normal::new(prior_mean, sd)
                        .map_err(|_| Error::NonFinite("homodyne marginal"))?
                        .sample(rng)
                } else {
                    prior_mean
                }
            }
        };

        let keep = kept_indices(self.n_modes(), mode);
        let meas = [2 * mode, 2 * mode + 1];
        let a = select_mat(&self.cov, &keep, &keep);
        let c = select_mat(&self.cov, &keep, &meas);
        let b = Matrix2::new(
            self.cov[(meas[0], meas[0])],
            self.cov[(meas[0], meas[1])],
            self.cov[(meas[1], meas[0])],
            self.cov[(meas[1], meas[1])],
        );
        let proj = match quadrature {
            Quadrature::X => Matrix2::new(1.0, 0.0, 0.0, 0.0),
            Quadrature::P => Matrix2::new(0.0, 0.0, 0.0, 1.0),
        };
        let pbp = proj * b * proj;
        let pinv = pseudo_inverse_2x2(&pbp);
        let pinv = DMatrix::from_column_slice(2, 2, pinv.as_slice());
        let gain = &c * pinv;

        let mut cov = &a - &gain * c.transpose();
        symmetrize(&mut cov);

        let mut residual = DVector::zeros(2);
        residual[quadrature.offset()] = value - prior_mean;
        let mean = select_vec(&self.mean, &keep) + &gain * residual;

        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("conditioned state"));
        }
        Ok((GaussianState { mean, cov }, value))
    }

    /// Symplectic eigenvalues of the covariance matrix, ascending.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        symplectic_spectrum(&self.cov)
    }

    /// True when every symplectic eigenvalue is at least `1/2 − tol`.
    pub fn is_bona_fide(&self, tol: f64) -> Result<bool> {
        Ok(self.symplectic_spectrum()?[0] >= VACUUM_VARIANCE - tol)
    }

    /// True when every symplectic eigenvalue equals `1/2` to `tol`.
    pub fn is_pure(&self, tol: f64) -> Result<bool> {
        Ok(self
            .symplectic_spectrum()?
            .iter()
            .all(|nu| (nu - VACUUM_VARIANCE).abs() <= tol))
    }
}

fn pseudo_inverse_2x2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let svd = m.svd(true, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max.is_nan() || sigma_max <= PINV_CUTOFF {
        return Matrix2::zeros();
    }
    svd.pseudo_inverse(PINV_CUTOFF * sigma_max)
        .unwrap_or_else(|_| Matrix2::zeros())
}

fn kept_indices(n_modes: usize, removed: usize) -> Vec<usize> {
    (0..2 * n_modes).filter(|i| i / 2 != removed).collect()
}

fn select_vec(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn select_mat(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Symplectic eigenvalues of a covariance matrix, ascending.
///
/// The eigenvalues of `Ω·Γ` come in pairs `±iν`. Positive definite `Γ` is
/// handled through its Cholesky factor; anything else goes through a Schur
/// decomposition of `Ω·Γ`. Real parts or pair mismatches beyond
/// [`PAIRING_TOL`] (relative to the largest modulus) are reported as
/// [`Error::Spectrum`].
pub fn symplectic_spectrum(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !cov.is_square() || !cov.nrows().is_multiple_of(2) || cov.nrows() == 0 {
        return Err(Error::invalid(format!(
            "covariance must be square with even dimension, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance"));
    }
    let asym = max_asymmetry(cov);
    if asym > SYMMETRY_TOL * cov.amax().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let n = cov.nrows() / 2;
    let moduli = match cov.clone().cholesky() {
        // Lᵀ·Ω·L is antisymmetric and similar to Ω·Γ: its singular values
        // are the moduli of the eigenvalues of Ω·Γ.
        Some(chol) => {
            let l = chol.l();
            (l.transpose() * symplectic_form(n) * &l)
                .singular_values()
                .iter()
                .copied()
                .collect()
        }
        None => schur_moduli(cov, n)?,
    };
    pair_moduli(moduli)
}

fn schur_moduli(cov: &DMatrix<f64>, n: usize) -> Result<Vec<f64>> {
    let m = symplectic_form(n) * cov;
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenSolver)?;
    let eig = schur.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if let Some(z) = eig.iter().find(|z| z.re.abs() > PAIRING_TOL * scale) {
        return Err(Error::Spectrum(format!(
            "eigenvalue {z} of Ω·Γ has a non-negligible real part"
        )));
    }
    Ok(eig.iter().map(|z| z.im.abs()).collect())
}

fn pair_moduli(mut moduli: Vec<f64>) -> Result<Vec<f64>> {
    let scale = moduli.iter().copied().fold(0.0, f64::max).max(1.0);
    moduli.sort_by(|a, b| a.total_cmp(b));
    let mut spectrum = Vec::with_capacity(moduli.len() / 2);
    for pair in moduli.chunks(2) {
        if (pair[0] - pair[1]).abs() > PAIRING_TOL * scale {
            return Err(Error::Spectrum(format!(
                "unpaired eigenvalue moduli {} and {}",
                pair[0], pair[1]
            )));
        }
        spectrum.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(spectrum)
}

/// Partial time reversal: flips the sign of `p` for every listed mode.
///
/// The list must be a nonempty proper subset of the modes; reversing all
/// modes leaves the spectrum unchanged and is rejected.
pub fn partial_transpose(cov: &DMatrix<f64>, modes: &[usize]) -> Result<DMatrix<f64>> {
    if !cov.is_square() || !cov.nrows().is_multiple_of(2) || cov.nrows() == 0 {
        return Err(Error::invalid("covariance must be square with even dimension"));
    }
    let n = cov.nrows() / 2;
    let mut flip = vec![false; n];
    for &m in modes {
        check_mode(m, n)?;
        flip[m] = true;
    }
    let count = flip.iter().filter(|&&f| f).count();
    if count == 0 {
        return Err(Error::InvalidPartition("empty subset".into()));
    }
    if count == n {
        return Err(Error::InvalidPartition(
            "subset covers every mode (global time reversal)".into(),
        ));
    }
    let sign = |i: usize| if i % 2 == 1 && flip[i / 2] { -1.0 } else { 1.0 };
    Ok(DMatrix::from_fn(cov.nrows(), cov.ncols(), |r, c| {
        sign(r) * sign(c) * cov[(r, c)]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn coeffs(n_modes: usize, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut v = vec![0.0; 2 * n_modes];
        for &(i, c) in terms {
            v[i] += c;
        }
        v
    }

    /// Two atoms (modes 0, 1) and light (mode 2) after an α = 0 pass through
    /// both atoms with coupling κ, before measurement.
    fn bipartite_premeasurement(kappa: f64) -> GaussianState {
        let s = GaussianState::vacuum(3).unwrap();
        let m1 = qnd_pass_map(3, 2, 0, kappa, 0.0).unwrap();
        let m2 = qnd_pass_map(3, 2, 1, kappa, 0.0).unwrap();
        s.apply(&m1.then(&m2).unwrap()).unwrap()
    }

    fn bipartite_conditioned(kappa: f64) -> GaussianState {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        bipartite_premeasurement(kappa)
            .homodyne_condition(2, Quadrature::X, Outcome::Pinned(0.0), &mut rng)
            .unwrap()
            .0
    }

    #[test]
    fn vacuum_moments() {
        let s = GaussianState::vacuum(1).unwrap();
        assert_eq!(s.cov(), &DMatrix::from_diagonal_element(2, 2, 0.5));
        assert_eq!(s.mean(), &DVector::zeros(2));
        let s2 = GaussianState::vacuum(2).unwrap();
        assert_abs_diff_eq!(s2.variance_of(&coeffs(2, &[(0, 1.0), (2, 1.0)])).unwrap(), 1.0);
        let nu = GaussianState::vacuum(3).unwrap().symplectic_spectrum().unwrap();
        assert_eq!(nu.len(), 3);
        for v in nu {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
        }
        assert_eq!(GaussianState::vacuum(0), Err(Error::NoModes));
    }

    #[test]
    fn pass_map_alpha_zero() {
        let m = qnd_pass_map(2, 1, 0, 1.0, 0.0).unwrap();
        // rows: x_A, p_A, x_L, p_L
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, -1.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, -1.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(m.matrix(), &expected);
        assert_eq!(qnd_pass_map(3, 2, 0, 0.0, 0.7).unwrap(), SymplecticMap::identity(3));
    }

    #[test]
    fn pass_map_is_symplectic_on_grid() {
        for kappa in [0.3, 1.0, 2.5] {
            for alpha in [0.0, FRAC_PI_4, -FRAC_PI_4, FRAC_PI_2, -FRAC_PI_2] {
                let m = qnd_pass_map(3, 1, 2, kappa, alpha).unwrap();
                let s = m.matrix();
                let omega = symplectic_form(3);
                let lhs = s * &omega * s.transpose();
                assert!((lhs - omega).amax() < 1e-10, "κ={kappa} α={alpha}");
            }
        }
    }

    #[test]
    fn pass_map_rejects_bad_modes() {
        assert_eq!(qnd_pass_map(2, 1, 1, 1.0, 0.0), Err(Error::CoincidentModes(1)));
        assert!(matches!(
            qnd_pass_map(2, 2, 0, 1.0, 0.0),
            Err(Error::ModeOutOfRange { mode: 2, .. })
        ));
    }

    #[test]
    fn rotation_examples() {
        let vac = GaussianState::vacuum(1).unwrap();
        assert_eq!(vac.rotate_mode(0, 0.0).unwrap(), vac);
        let r = vac.rotate_mode(0, FRAC_PI_2).unwrap();
        assert!((r.cov() - vac.cov()).amax() < 1e-15);

        let (a, b) = (3.0, 0.25);
        let s = GaussianState::new(DVector::zeros(2), DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]))).unwrap();
        let r = s.rotate_mode(0, FRAC_PI_4).unwrap();
        // p' = (x + p)/√2 → Var = (a + b)/2
        assert_abs_diff_eq!(r.cov()[(1, 1)], (a + b) / 2.0, epsilon = 1e-14);
        assert!(vac.rotate_mode(1, 0.1).is_err());
    }

    #[test]
    fn single_sample_output_variance() {
        for kappa in [0.3, 1.0, 2.5] {
            let s = GaussianState::vacuum(2).unwrap();
            let out = s.apply(&qnd_pass_map(2, 1, 0, kappa, 0.0).unwrap()).unwrap();
            assert_abs_diff_eq!(out.cov()[(2, 2)], 0.5 + kappa * kappa / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn sequential_passes_commute() {
        let a = qnd_pass_map(3, 2, 0, 0.7, 0.4).unwrap();
        let b = qnd_pass_map(3, 2, 1, 0.7, -1.1).unwrap();
        let ab = a.then(&b).unwrap();
        let ba = b.then(&a).unwrap();
        assert!((ab.matrix() - ba.matrix()).amax() < 1e-15);
    }

    #[test]
    fn identity_map_leaves_state() {
        let s = bipartite_conditioned(1.0);
        assert_eq!(s.apply(&SymplecticMap::identity(2)).unwrap(), s);
        assert!(matches!(
            s.apply(&SymplecticMap::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conditioning_uncorrelated_mode() {
        let a = bipartite_conditioned(1.0);
        let joint = a.tensor(&GaussianState::vacuum(1).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (after, _) = joint
            .homodyne_condition(2, Quadrature::X, Outcome::Sampled, &mut rng)
            .unwrap();
        assert!((after.cov() - a.cov()).amax() < 1e-15);
    }

    #[test]
    fn bipartite_conditioned_variances() {
        let kappa: f64 = 1.0;
        let s = bipartite_conditioned(kappa);
        let k2 = kappa * kappa;
        assert_abs_diff_eq!(s.variance_of(&coeffs(2, &[(1, 1.0), (3, 1.0)])).unwrap(), 1.0 / (1.0 + 2.0 * k2), epsilon = 1e-14);
        let var_p = (1.0 + k2) / (2.0 * (1.0 + 2.0 * k2));
        assert_abs_diff_eq!(s.cov()[(1, 1)], var_p, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(3, 3)], var_p, epsilon = 1e-14);
        assert_abs_diff_eq!(s.cov()[(1, 3)], -k2 / (2.0 * (1.0 + 2.0 * k2)), epsilon = 1e-14);
        assert_abs_diff_eq!(s.variance_of(&coeffs(2, &[(0, 1.0), (2, 1.0)])).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.variance_of(&coeffs(2, &[(0, 1.0), (2, -1.0)])).unwrap(), 1.0, epsilon = 1e-14);
    }

    /// Conditional Gaussian by rejection: keep samples whose x_L lands in a
    /// narrow window around the pinned outcome.
    #[test]
    fn conditioning_matches_monte_carlo() {
        let kappa: f64 = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n01 = Normal::new(0.0, 0.5f64.sqrt()).unwrap();
        let (mut sum, mut sum_sq, mut prod, mut count) = ([0.0; 2], [0.0; 2], 0.0, 0usize);
        let window = 0.02;
        while count < 20_000 {
            let (p1, p2, xl): (f64, f64, f64) =
                (n01.sample(&mut rng), n01.sample(&mut rng), n01.sample(&mut rng));
            let xl_out = xl - kappa * (p1 + p2);
            if xl_out.abs() < window {
                for (k, v) in [p1, p2].into_iter().enumerate() {
                    sum[k] += v;
                    sum_sq[k] += v * v;
                }
                prod += p1 * p2;
                count += 1;
            }
        }
        let n = count as f64;
        let var1 = sum_sq[0] / n - (sum[0] / n).powi(2);
        let cov12 = prod / n - (sum[0] / n) * (sum[1] / n);
        let s = bipartite_conditioned(kappa);
        assert!((var1 - s.cov()[(1, 1)]).abs() < 0.02, "{var1}");
        assert!((cov12 - s.cov()[(1, 3)]).abs() < 0.02, "{cov12}");
    }

    #[test]
    fn conditioning_is_outcome_independent() {
        let pre = bipartite_premeasurement(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, _) = pre.homodyne_condition(2, Quadrature::X, Outcome::Pinned(0.0), &mut rng).unwrap();
        let (b, v) = pre.homodyne_condition(2, Quadrature::X, Outcome::Pinned(7.3), &mut rng).unwrap();
        assert_eq!(v, 7.3);
        assert_eq!(a.cov(), b.cov());
        assert_ne!(a.mean(), b.mean());
    }

    #[test]
    fn conditioning_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let one = GaussianState::vacuum(1).unwrap();
        assert_eq!(
            one.homodyne_condition(0, Quadrature::X, Outcome::Sampled, &mut rng),
            Err(Error::NothingToKeep)
        );
        let two = GaussianState::vacuum(2).unwrap();
        assert!(two
            .homodyne_condition(1, Quadrature::X, Outcome::Pinned(f64::NAN), &mut rng)
            .is_err());
    }

    #[test]
    fn determined_quadrature_leaves_covariance() {
        // x of mode 1 has zero variance: nothing left to learn.
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, 0.0, 1.0]));
        let s = GaussianState::from_parts_unchecked(DVector::zeros(4), cov);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (after, _) = s.homodyne_condition(1, Quadrature::X, Outcome::Pinned(3.0), &mut rng).unwrap();
        assert_eq!(after.cov(), &DMatrix::from_diagonal_element(2, 2, 0.5));
    }

    #[test]
    fn variance_length_mismatch() {
        let s = GaussianState::vacuum(2).unwrap();
        assert!(matches!(s.variance_of(&[1.0, 0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spectrum_examples() {
        let (a, b) = (2.0, 0.3);
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]));
        let nu = symplectic_spectrum(&cov).unwrap();
        assert_abs_diff_eq!(nu[0], (a * b).sqrt(), epsilon = 1e-14);

        let s = bipartite_conditioned(1.0);
        let nu = symplectic_spectrum(&partial_transpose(s.cov(), &[1]).unwrap()).unwrap();
        // sum/difference modes: (3/2, 1/2) and (1/2, 1/6) after transposition
        assert_abs_diff_eq!(nu[0], (1.0f64 / 12.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(nu[1], 3.0f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nu[0], 1.0 / (2.0 * 3.0f64.sqrt()), epsilon = 1e-12);

        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(matches!(symplectic_spectrum(&asym), Err(Error::NotSymmetric(_))));
        assert!(symplectic_spectrum(&DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn partial_transpose_rules() {
        let s = bipartite_conditioned(1.0);
        let pt = partial_transpose(s.cov(), &[0]).unwrap();
        assert_eq!(partial_transpose(&pt, &[0]).unwrap(), *s.cov());
        assert!(partial_transpose(s.cov(), &[]).is_err());
        assert!(partial_transpose(s.cov(), &[0, 1]).is_err());

        let product = GaussianState::vacuum(1)
            .unwrap()
            .rotate_mode(0, 0.3)
            .unwrap()
            .tensor(&GaussianState::vacuum(1).unwrap());
        let nu = symplectic_spectrum(&partial_transpose(product.cov(), &[1]).unwrap()).unwrap();
        assert!(nu[0] >= 0.5 - 1e-9);
    }

    #[test]
    fn new_rejects_unphysical() {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![0.1, 0.1]));
        assert!(matches!(GaussianState::new(DVector::zeros(2), cov), Err(Error::NotBonaFide(_))));
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(GaussianState::new(DVector::zeros(2), cov), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn discard_and_reduce() {
        let s = bipartite_premeasurement(1.0);
        let d = s.discard_mode(2).unwrap();
        assert_eq!(d.n_modes(), 2);
        assert_eq!(d, s.reduced(&[0, 1]).unwrap());
        assert_eq!(
            GaussianState::vacuum(1).unwrap().discard_mode(0),
            Err(Error::NothingToKeep)
        );
    }

    #[test]
    fn spectrum_of_pure_correlated_pair() {
        // Conditioned state of two samples after one beam; a case where a
        // symmetric eigensolver with machine-epsilon deflation goes wrong.
        let cov = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.32717448064592036, 0.0, 0.12220609669735666, -0.12220609669735666,
                0.0, 1.0598531985819584, -0.3958759931862816, -0.3958759931862816,
                0.12220609669735666, -0.3958759931862816, 0.6935138396139393, 0.36633935896801906,
                -0.12220609669735666, -0.3958759931862816, 0.36633935896801906, 0.6935138396139393,
            ],
        );
        for nu in symplectic_spectrum(&cov).unwrap() {
            assert!((nu - 0.5).abs() < 1e-12, "{nu}");
        }
    }
}
