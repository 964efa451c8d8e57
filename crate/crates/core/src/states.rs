//! Quantum states: validated density matrices, isotropic families, pure
//! product ensembles and the PPT test.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{bloch_decompose, BasisSet};
use crate::error::{Error, Result};
use crate::linalg::{
    eigvals_hermitian, haar_unitary, hs_norm, partial_transpose, tensor_product, vec_norm,
    ComplexMatrix, HermitianOperator, Subsystem, TAU_EIG, TAU_HERM, TAU_PSD,
};

/// A validated state on `C^{d_a} (x) C^{d_b}`: Hermitian, unit trace, PSD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixJson", into = "DensityMatrixJson")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    d_a: usize,
    d_b: usize,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidDimension {
                dim: d_a.min(d_b),
                reason: "subsystem dimensions must be positive",
            });
        }
        if matrix.dim() != d_a * d_b {
            return Err(Error::DimensionMismatch {
                context: "density matrix",
                expected: d_a * d_b,
                found: matrix.dim(),
            });
        }
        let max_deviation = matrix.hermiticity_defect();
        if max_deviation > TAU_HERM {
            return Err(Error::NotHermitian { max_deviation });
        }
        let trace = matrix.trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TAU_HERM {
            return Err(Error::TraceNotOne { trace: trace.re });
        }
        let min_eigenvalue = eigvals_hermitian(&matrix)?[0];
        if min_eigenvalue < -TAU_PSD {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, d_a, d_b })
    }

    /// For matrices that are states by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix, d_a: usize, d_b: usize) -> Self {
        debug_assert_eq!(matrix.dim(), d_a * d_b);
        Self { matrix, d_a, d_b }
    }

    pub fn maximally_mixed(d_a: usize, d_b: usize) -> Self {
        let n = d_a * d_b;
        Self::new_unchecked(
            ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
            d_a,
            d_b,
        )
    }

    pub fn from_pure(psi: &[Complex64], d_a: usize, d_b: usize) -> Result<Self> {
        let norm = vec_norm(psi);
        if (norm - 1.0).abs() > TAU_EIG {
            return Err(Error::NonUnitVector { name: "psi", norm });
        }
        Self::new(ComplexMatrix::outer(psi), d_a, d_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Wire format: `{"d_a", "d_b", "entries": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    d_a: usize,
    d_b: usize,
    entries: Vec<[f64; 2]>,
}

impl From<DensityMatrix> for DensityMatrixJson {
    fn from(rho: DensityMatrix) -> Self {
        Self {
            d_a: rho.d_a,
            d_b: rho.d_b,
            entries: rho.matrix.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<DensityMatrixJson> for DensityMatrix {
    type Error = Error;

    fn try_from(j: DensityMatrixJson) -> Result<Self> {
        let n = j.d_a * j.d_b;
        let entries = j
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        DensityMatrix::new(ComplexMatrix::new(n, entries)?, j.d_a, j.d_b)
    }
}

/// Parameters `(d, alpha)` of the isotropic state
/// `alpha |phi+><phi+| + (1 - alpha)/d^2 * 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicParams {
    d: usize,
    alpha: f64,
}

/// Slack on the admissible alpha interval so that grid endpoints computed in
/// floating point are not rejected.
const ALPHA_SLACK: f64 = 1e-12;

impl IsotropicParams {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension {
                dim: d,
                reason: "isotropic states need d >= 2",
            });
        }
        let (min, max) = Self::alpha_range(d);
        if !(alpha >= min - ALPHA_SLACK && alpha <= max + ALPHA_SLACK) {
            return Err(Error::AlphaOutOfRange { d, alpha, min, max });
        }
        Ok(Self { d, alpha })
    }

    /// Positivity range `[-1/(d^2-1), 1]`.
    pub fn alpha_range(d: usize) -> (f64, f64) {
        (-1.0 / ((d * d - 1) as f64), 1.0)
    }

    /// Separability threshold `1/(d+1)`.
    pub fn threshold(d: usize) -> f64 {
        1.0 / (d as f64 + 1.0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_entangled(&self) -> bool {
        self.alpha > Self::threshold(self.d)
    }

    /// The boundary state `rho_{1/(d+1)}` of the same dimension.
    pub fn boundary(&self) -> Self {
        Self {
            d: self.d,
            alpha: Self::threshold(self.d),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separability {
    Separable,
    Entangled,
}

/// `|phi+> = 1/sqrt(d) sum_i |i>|i>`.
pub fn max_entangled(d: usize) -> Result<Vec<Complex64>> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "maximally entangled state needs d >= 2",
        });
    }
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ok(v)
}

pub fn isotropic(p: IsotropicParams) -> DensityMatrix {
    let d = p.d;
    let n = d * d;
    let phi = max_entangled(d).expect("validated d");
    let mut m = ComplexMatrix::outer(&phi).scale_real(p.alpha);
    m.add_scaled_assign(&ComplexMatrix::identity(n), (1.0 - p.alpha) / n as f64);
    DensityMatrix::new_unchecked(m, d, d)
}

pub fn isotropic_separability(p: IsotropicParams) -> Separability {
    if p.is_entangled() {
        Separability::Entangled
    } else {
        Separability::Separable
    }
}

/// Signs `c_i` such that `d^2 |phi+><phi+| - 1 = (d/2) sum_i c_i g_i (x) g_i`
/// in [`BasisSet::canonical`]. The expansion is computed, not assumed: any
/// local term, cross term or diagonal coefficient other than `+-1` is
/// reported as [`Error::GammaExpansion`] with 1-based generator indices
/// (index 0 stands for the identity).
pub fn gamma_signs(d: usize) -> Result<Vec<i8>> {
    let basis = BasisSet::canonical(d)?;
    let phi = max_entangled(d)?;
    let projector = DensityMatrix::new_unchecked(ComplexMatrix::outer(&phi), d, d);
    // projector = 1/d^2 (1 + a.g(x)1 + b.1(x)g + c_ij g_i(x)g_j), so
    // d^2 projector - 1 has coefficients (a, b, c) directly.
    let v = bloch_decompose(&projector, &basis, &basis)?;
    let half_d = d as f64 / 2.0;
    let refute = |i: usize, j: usize, coefficient: f64| Error::GammaExpansion {
        d,
        i,
        j,
        coefficient,
    };
    for (i, (&a, &b)) in v.a.iter().zip(&v.b).enumerate() {
        if a.abs() > TAU_EIG {
            return Err(refute(i + 1, 0, a));
        }
        if b.abs() > TAU_EIG {
            return Err(refute(0, i + 1, b));
        }
    }
    let mut signs = Vec::with_capacity(basis.len());
    for (i, row) in v.c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if i != j && cij.abs() > TAU_EIG {
                return Err(refute(i + 1, j + 1, cij));
            }
        }
        let ci = row[i] / half_d;
        if (ci.abs() - 1.0).abs() > TAU_EIG {
            return Err(refute(i + 1, i + 1, ci));
        }
        signs.push(if ci > 0.0 { 1 } else { -1 });
    }
    Ok(signs)
}

/// `Gamma = sum_i c_i g_i (x) g_i` with the signs of [`gamma_signs`]; for
/// `d = 2` this is `Sigma = sx(x)sx - sy(x)sy + sz(x)sz`, for `d = 3` the
/// Gell-Mann analogue `Lambda`.
pub fn gamma_operator(d: usize) -> Result<HermitianOperator> {
    let signs = gamma_signs(d)?;
    let basis = BasisSet::canonical(d)?;
    let mut m = ComplexMatrix::zeros(d * d);
    for (c, g) in signs.iter().zip(basis.generators()) {
        m.add_scaled_assign(&tensor_product(g.matrix(), g.matrix()), *c as f64);
    }
    Ok(HermitianOperator::new_unchecked(m))
}

/// `rho_alpha = 1/d^2 (1 + (d/2) alpha Gamma)`.
pub fn isotropic_gamma_form(p: IsotropicParams) -> Result<DensityMatrix> {
    let d = p.d;
    let n = d * d;
    let gamma = gamma_operator(d)?;
    let m = ComplexMatrix::identity(n)
        .add_scaled(gamma.matrix(), d as f64 / 2.0 * p.alpha)
        .scale_real(1.0 / n as f64);
    Ok(DensityMatrix::new_unchecked(m, d, d))
}

/// Largest HS deviation `||(U (x) U*) rho (U (x) U*)^dagger - rho||` over
/// `trials` Haar-random `U` drawn from the given seed.
pub fn twirl_invariance_check(rho: &DensityMatrix, trials: usize, seed: u64) -> Result<f64> {
    if rho.d_a() != rho.d_b() {
        return Err(Error::DimensionMismatch {
            context: "twirl_invariance_check (d_a must equal d_b)",
            expected: rho.d_a(),
            found: rho.d_b(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = haar_unitary(rho.d_a(), &mut rng);
        let w = tensor_product(&u, &u.conj());
        let rotated = w.matmul(rho.matrix()).matmul(&w.adjoint());
        worst = worst.max(hs_norm(&(&rotated - rho.matrix())));
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductTerm {
    pub weight: f64,
    pub psi: Vec<Complex64>,
    pub phi: Vec<Complex64>,
}

impl ProductTerm {
    /// `|psi><psi| (x) |phi><phi|`.
    pub fn projector(&self) -> ComplexMatrix {
        tensor_product(
            &ComplexMatrix::outer(&self.psi),
            &ComplexMatrix::outer(&self.phi),
        )
    }
}

/// Convex combination of pure product states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductEnsemble {
    d_a: usize,
    d_b: usize,
    terms: Vec<ProductTerm>,
}

impl ProductEnsemble {
    pub fn new(d_a: usize, d_b: usize, terms: Vec<ProductTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidEnsemble("no terms".into()));
        }
        let mut total = 0.0;
        for (k, t) in terms.iter().enumerate() {
            if !(0.0..=1.0).contains(&t.weight) {
                return Err(Error::InvalidEnsemble(format!(
                    "weight {} of term {k} outside [0, 1]",
                    t.weight
                )));
            }
            if t.psi.len() != d_a || t.phi.len() != d_b {
                return Err(Error::InvalidEnsemble(format!(
                    "term {k} has factor lengths ({}, {}), expected ({d_a}, {d_b})",
                    t.psi.len(),
                    t.phi.len()
                )));
            }
            for (name, v) in [("psi", &t.psi), ("phi", &t.phi)] {
                let norm = vec_norm(v);
                if (norm - 1.0).abs() > TAU_EIG {
                    return Err(Error::NonUnitVector { name, norm });
                }
            }
            total += t.weight;
        }
        if (total - 1.0).abs() > TAU_HERM {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        Ok(Self { d_a, d_b, terms })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_density(&self) -> DensityMatrix {
        ensemble_to_density(self)
    }
}

pub fn ensemble_to_density(e: &ProductEnsemble) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(e.d_a * e.d_b);
    for t in &e.terms {
        m.add_scaled_assign(&t.projector(), t.weight);
    }
    DensityMatrix::new_unchecked(m, e.d_a, e.d_b)
}

/// Smallest eigenvalue of the partial transpose over B.
pub fn min_partial_transpose_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), rho.d_a(), rho.d_b(), Subsystem::B)?;
    Ok(eigvals_hermitian(&pt)?[0])
}

/// Positive partial transpose test. Equivalent to separability when
/// `d_a * d_b <= 6`.
pub fn is_ppt(rho: &DensityMatrix) -> Result<bool> {
    Ok(min_partial_transpose_eigenvalue(rho)? >= -TAU_PSD)
}
