//! Traceless Hermitian operator bases (Pauli, Gell-Mann and their
//! generalization to any `d`) and Bloch-type coefficient decompositions.
//!
//! Every generator `g` satisfies `Tr g = 0` and `Tr g_i g_j = 2 delta_ij`.
//! A bipartite state decomposes as
//!
//! ```text
//! rho = 1/(d_a d_b) (1 + a_i g_i (x) 1 + b_i 1 (x) g_i + c_ij g_i (x) g_j)
//! ```
//!
//! and a single qudit as `omega = 1/d (1 + sqrt(d(d-1)/2) n_i g_i)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, ComplexMatrix, HermitianOperator, TAU_HERM};
use crate::states::DensityMatrix;

/// Which family a generator belongs to. Indices are zero-based matrix indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// `E_jk + E_kj`, `j < k`.
    Symmetric { j: usize, k: usize },
    /// `-i E_jk + i E_kj`, `j < k`.
    Antisymmetric { j: usize, k: usize },
    /// `sqrt(2/(l(l+1))) (sum_{m<l} E_mm - l E_ll)`, `1 <= l < d`.
    Diagonal { l: usize },
}

#[derive(Clone, Debug)]
pub struct BasisSet {
    d: usize,
    generators: Vec<HermitianOperator>,
    kinds: Vec<GeneratorKind>,
}

impl BasisSet {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &HermitianOperator {
        &self.generators[i]
    }

    pub fn kinds(&self) -> &[GeneratorKind] {
        &self.kinds
    }

    /// The basis used for isotropic-state formulas: Pauli order for `d = 2`,
    /// the Gell-Mann `lambda_1..lambda_8` order for `d = 3`, and the
    /// symmetric / antisymmetric / diagonal order of [`generalized_basis`]
    /// otherwise.
    pub fn canonical(d: usize) -> Result<Self> {
        match d {
            2 => Ok(pauli_basis()),
            3 => Ok(gell_mann_basis()),
            _ => generalized_basis(d),
        }
    }

    fn permuted(self, order: &[usize]) -> Self {
        Self {
            d: self.d,
            generators: order.iter().map(|&i| self.generators[i].clone()).collect(),
            kinds: order.iter().map(|&i| self.kinds[i]).collect(),
        }
    }
}

pub fn pauli_basis() -> BasisSet {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let sy = ComplexMatrix::new(2, vec![z, -i, i, z]).expect("2x2");
    let sz = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
    BasisSet {
        d: 2,
        generators: [sx, sy, sz]
            .into_iter()
            .map(HermitianOperator::new_unchecked)
            .collect(),
        kinds: vec![
            GeneratorKind::Symmetric { j: 0, k: 1 },
            GeneratorKind::Antisymmetric { j: 0, k: 1 },
            GeneratorKind::Diagonal { l: 1 },
        ],
    }
}

/// Position of `lambda_1 .. lambda_8` inside `generalized_basis(3)`.
const GELL_MANN_ORDER: [usize; 8] = [0, 3, 6, 1, 4, 2, 5, 7];

/// The eight Gell-Mann matrices in the textbook order.
pub fn gell_mann_basis() -> BasisSet {
    generalized_basis(3)
        .expect("d = 3 is valid")
        .permuted(&GELL_MANN_ORDER)
}

/// Generalized Gell-Mann generators for `C^d`: all symmetric pair matrices
/// in lexicographic `(j, k)` order, then the antisymmetric ones in the same
/// order, then the `d - 1` diagonal ones.
pub fn generalized_basis(d: usize) -> Result<BasisSet> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "a generator basis needs d >= 2",
        });
    }
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| (j + 1..d).map(move |k| (j, k)))
        .collect();
    let mut generators = Vec::with_capacity(d * d - 1);
    let mut kinds = Vec::with_capacity(d * d - 1);

    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d);
        m[(j, k)] = Complex64::new(1.0, 0.0);
        m[(k, j)] = Complex64::new(1.0, 0.0);
        generators.push(HermitianOperator::new_unchecked(m));
        kinds.push(GeneratorKind::Symmetric { j, k });
    }
    for &(j, k) in &pairs {
        let mut m = ComplexMatrix::zeros(d);
        m[(j, k)] = Complex64::new(0.0, -1.0);
        m[(k, j)] = Complex64::new(0.0, 1.0);
        generators.push(HermitianOperator::new_unchecked(m));
        kinds.push(GeneratorKind::Antisymmetric { j, k });
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -(l as f64) * norm;
        generators.push(HermitianOperator::new_unchecked(
            ComplexMatrix::from_real_diagonal(&diag),
        ));
        kinds.push(GeneratorKind::Diagonal { l });
    }
    Ok(BasisSet {
        d,
        generators,
        kinds,
    })
}

/// Bipartite coefficients `(a_i, b_i, c_ij)` of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub d_a: usize,
    pub d_b: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Row `i` holds `c_i1 .. c_in`.
    pub c: Vec<Vec<f64>>,
}

impl BlochVector {
    pub fn zero(d_a: usize, d_b: usize) -> Self {
        let (na, nb) = (d_a * d_a - 1, d_b * d_b - 1);
        Self {
            d_a,
            d_b,
            a: vec![0.0; na],
            b: vec![0.0; nb],
            c: vec![vec![0.0; nb]; na],
        }
    }
}

fn real_coefficient(z: Complex64, index: usize) -> Result<f64> {
    if z.im.abs() > TAU_HERM {
        return Err(Error::ComplexCoefficient { index, imag: z.im });
    }
    Ok(z.re)
}

/// Partial trace over A of `rho (x (x) 1)`, a `d_b x d_b` matrix.
fn contract_a(rho: &ComplexMatrix, x: &ComplexMatrix, d_a: usize, d_b: usize) -> ComplexMatrix {
    // [Tr_A(rho (x (x) 1))]_{kl} = sum_{i,j} rho[(i,k),(j,l)] x[j,i]
    let mut out = ComplexMatrix::zeros(d_b);
    for i in 0..d_a {
        for j in 0..d_a {
            let xji = x[(j, i)];
            if xji == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..d_b {
                for l in 0..d_b {
                    out[(k, l)] += rho[(i * d_b + k, j * d_b + l)] * xji;
                }
            }
        }
    }
    out
}

/// `Tr(m y)` for square `m`, `y`.
fn trace_product(m: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    let n = m.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for k in 0..n {
        for l in 0..n {
            s += m[(k, l)] * y[(l, k)];
        }
    }
    s
}

pub fn bloch_decompose(
    rho: &DensityMatrix,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
) -> Result<BlochVector> {
    let (d_a, d_b) = (basis_a.d(), basis_b.d());
    if rho.d_a() != d_a || rho.d_b() != d_b {
        return Err(Error::DimensionMismatch {
            context: "bloch_decompose",
            expected: d_a * d_b,
            found: rho.dim(),
        });
    }
    let m = rho.matrix();
    let id_a = ComplexMatrix::identity(d_a);
    let reduced_b = contract_a(m, &id_a, d_a, d_b);

    let mut out = BlochVector::zero(d_a, d_b);
    let nb = basis_b.len();
    for (j, g) in basis_b.generators().iter().enumerate() {
        let t = trace_product(&reduced_b, g.matrix());
        out.b[j] = real_coefficient(t, j)? * d_b as f64 / 2.0;
    }
    for (i, ga) in basis_a.generators().iter().enumerate() {
        let partial = contract_a(m, ga.matrix(), d_a, d_b);
        out.a[i] = real_coefficient(partial.trace(), i)? * d_a as f64 / 2.0;
        for (j, gb) in basis_b.generators().iter().enumerate() {
            let t = trace_product(&partial, gb.matrix());
            out.c[i][j] = real_coefficient(t, i * nb + j)? * (d_a * d_b) as f64 / 4.0;
        }
    }
    Ok(out)
}

pub fn bloch_compose(
    v: &BlochVector,
    basis_a: &BasisSet,
    basis_b: &BasisSet,
) -> Result<ComplexMatrix> {
    let (d_a, d_b) = (basis_a.d(), basis_b.d());
    let check = |expected: usize, found: usize| -> Result<()> {
        if expected != found {
            return Err(Error::DimensionMismatch {
                context: "bloch_compose",
                expected,
                found,
            });
        }
        Ok(())
    };
    check(d_a, v.d_a)?;
    check(d_b, v.d_b)?;
    check(basis_a.len(), v.a.len())?;
    check(basis_b.len(), v.b.len())?;
    check(basis_a.len(), v.c.len())?;
    for row in &v.c {
        check(basis_b.len(), row.len())?;
    }

    // Build A-side operator for each i first: X_i = a_i 1 + sum_j c_ij g_j
    // so the sum collapses into d_a^2 - 1 tensor products.
    let n = d_a * d_b;
    let mut out = ComplexMatrix::zeros(n);
    let id_a = ComplexMatrix::identity(d_a);
    let id_b = ComplexMatrix::identity(d_b);

    let mut b_side = id_b.clone();
    for (bj, g) in v.b.iter().zip(basis_b.generators()) {
        b_side.add_scaled_assign(g.matrix(), *bj);
    }
    accumulate_kron(&mut out, &id_a, &b_side, d_b);

    for (i, ga) in basis_a.generators().iter().enumerate() {
        let mut right = id_b.scale_real(v.a[i]);
        for (cij, gb) in v.c[i].iter().zip(basis_b.generators()) {
            if *cij != 0.0 {
                right.add_scaled_assign(gb.matrix(), *cij);
            }
        }
        accumulate_kron(&mut out, ga.matrix(), &right, d_b);
    }
    Ok(out.scale_real(1.0 / n as f64))
}

fn accumulate_kron(out: &mut ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix, d_b: usize) {
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..d_b {
                for l in 0..d_b {
                    out[(i * d_b + k, j * d_b + l)] += aij * b[(k, l)];
                }
            }
        }
    }
}

fn single_scale(d: usize) -> f64 {
    ((d * (d - 1)) as f64 / 2.0).sqrt()
}

/// Bloch vector `n` of a single-qudit state
/// `omega = 1/d (1 + sqrt(d(d-1)/2) n_i g_i)`; `|n| = 1` exactly for pure states.
pub fn qudit_bloch_vector(omega: &ComplexMatrix, basis: &BasisSet) -> Result<Vec<f64>> {
    let d = basis.d();
    if omega.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "qudit_bloch_vector",
            expected: d,
            found: omega.dim(),
        });
    }
    let k = single_scale(d);
    basis
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let t = real_coefficient(hs_inner(g.matrix(), omega)?, i)?;
            Ok(t * d as f64 / (2.0 * k))
        })
        .collect()
}

pub fn qudit_from_bloch(n: &[f64], basis: &BasisSet) -> Result<ComplexMatrix> {
    let d = basis.d();
    if n.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            context: "qudit_from_bloch",
            expected: basis.len(),
            found: n.len(),
        });
    }
    let k = single_scale(d);
    let mut m = ComplexMatrix::identity(d);
    for (ni, g) in n.iter().zip(basis.generators()) {
        m.add_scaled_assign(g.matrix(), k * ni);
    }
    Ok(m.scale_real(1.0 / d as f64))
}
