//! Entanglement witnesses.
//!
//! The central object is the hyperplane operator built from a guessed
//! nearest separable state `g` and an entangled target `t`:
//!
//! ```text
//! C = (g - t - <g, g - t> 1) / ||g - t||
//! ```
//!
//! `C` vanishes on `g` and is an entanglement witness exactly when `g` is the
//! nearest separable state to `t`. Checking the witness property requires the
//! minimum of `<rho, C>` over separable states, which is attained on pure
//! product states and is computed here by multistart alternating eigenvector
//! minimization.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bases::pauli_basis;
use crate::error::{Error, Result};
use crate::linalg::{
    hs_inner, hs_norm, inner, jacobi_eigen, normalize, random_unit_vector, tensor_vec, vec_norm,
    ComplexMatrix, HermitianOperator, TAU_EIG,
};
use crate::states::{gamma_operator, DensityMatrix, IsotropicParams, ProductEnsemble, ProductTerm};

/// Sign decisions on witness expectations use this absolute tolerance.
pub const TAU_WIT: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub n_starts: usize,
    pub max_iters: usize,
    pub tol_conv: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_starts: 32,
            max_iters: 500,
            tol_conv: 1e-12,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::InvalidConfig("n_starts must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        if self.tol_conv.is_nan() || self.tol_conv < 0.0 {
            return Err(Error::InvalidConfig("tol_conv must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Best pure product state found for `min <psi (x) phi| A |psi (x) phi>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMinimum {
    pub value: f64,
    pub psi: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    /// Index of the start that produced the minimum.
    pub start: usize,
    /// Number of starts that met `tol_conv` within `max_iters`.
    pub converged_starts: usize,
}

impl ProductMinimum {
    pub fn to_ensemble(&self) -> ProductEnsemble {
        ProductEnsemble::new(
            self.psi.len(),
            self.phi.len(),
            vec![ProductTerm {
                weight: 1.0,
                psi: self.psi.clone(),
                phi: self.phi.clone(),
            }],
        )
        .expect("solver returns normalized vectors")
    }
}

/// `<phi|_B A |phi>_B`, a `d_a x d_a` matrix.
fn contract_b(a: &ComplexMatrix, phi: &[Complex64], d_a: usize, d_b: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d_a);
    for i in 0..d_a {
        for j in 0..d_a {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..d_b {
                let ck = phi[k].conj();
                let mut row = Complex64::new(0.0, 0.0);
                for l in 0..d_b {
                    row += a[(i * d_b + k, j * d_b + l)] * phi[l];
                }
                s += ck * row;
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// `<psi|_A A |psi>_A`, a `d_b x d_b` matrix.
fn contract_a(a: &ComplexMatrix, psi: &[Complex64], d_a: usize, d_b: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(d_b);
    for i in 0..d_a {
        let ci = psi[i].conj();
        for j in 0..d_a {
            let w = ci * psi[j];
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..d_b {
                for l in 0..d_b {
                    out[(k, l)] += w * a[(i * d_b + k, j * d_b + l)];
                }
            }
        }
    }
    out
}

struct StartOutcome {
    value: f64,
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
    converged: bool,
}

fn alternate_from(
    a: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
    mut psi: Vec<Complex64>,
    cfg: &SolverConfig,
) -> Result<StartOutcome> {
    let e = jacobi_eigen(&contract_a(a, &psi, d_a, d_b))?;
    let mut phi = e.min_vector();
    let mut value = e.min_value();
    for _ in 0..cfg.max_iters {
        let prev = psi.clone();
        let e = jacobi_eigen(&contract_b(a, &phi, d_a, d_b))?;
        psi = e.min_vector();
        let e = jacobi_eigen(&contract_a(a, &psi, d_a, d_b))?;
        phi = e.min_vector();
        let mut next = e.min_value();
        if let Some((x_psi, x_phi, x_value)) = extrapolate(a, d_a, d_b, &prev, &psi, next)? {
            psi = x_psi;
            phi = x_phi;
            next = x_value;
        }
        let decrease = value - next;
        value = value.min(next);
        if decrease < cfg.tol_conv {
            return Ok(StartOutcome {
                value,
                psi,
                phi,
                converged: true,
            });
        }
    }
    Ok(StartOutcome {
        value,
        psi,
        phi,
        converged: false,
    })
}

/// `(psi, phi, value)`.
type ProductPoint = (Vec<Complex64>, Vec<Complex64>, f64);

/// Alternating steps crawl along nearly flat valleys, moving `psi` in an
/// almost constant direction. Push further along that direction with doubling
/// step lengths and keep the best point, so long as it improves on `value`.
fn extrapolate(
    a: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
    prev: &[Complex64],
    psi: &[Complex64],
    value: f64,
) -> Result<Option<ProductPoint>> {
    let overlap = inner(psi, prev);
    if overlap.norm() == 0.0 {
        return Ok(None);
    }
    // Fix the eigenvector phase so the step is a genuine displacement.
    let phase = overlap / overlap.norm();
    let aligned: Vec<Complex64> = psi.iter().map(|z| z * phase).collect();
    let step: Vec<Complex64> = aligned.iter().zip(prev).map(|(x, y)| x - y).collect();
    if vec_norm(&step) < 1e-14 {
        return Ok(None);
    }
    let mut best: Option<ProductPoint> = None;
    let mut best_value = value;
    let mut t = 1.0;
    for _ in 0..30 {
        let mut trial: Vec<Complex64> = aligned.iter().zip(&step).map(|(x, s)| x + s * t).collect();
        normalize(&mut trial);
        let e = jacobi_eigen(&contract_a(a, &trial, d_a, d_b))?;
        let v = e.min_value();
        if v >= best_value {
            break;
        }
        best_value = v;
        best = Some((trial, e.min_vector(), v));
        t *= 2.0;
    }
    Ok(best)
}

/// Initial `psi` for start `index`: the caller's seeds first, then random
/// vectors from an independent ChaCha stream per start.
fn start_vector(index: usize, seeds: &[Vec<Complex64>], d_a: usize, seed: u64) -> Vec<Complex64> {
    if let Some(v) = seeds.get(index) {
        return v.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    random_unit_vector(d_a, &mut rng)
}

/// Minimum of `<rho, A>` over separable `rho` on `C^{d_a} (x) C^{d_b}`.
///
/// Every start runs alternating minimization: with `phi` fixed the best `psi`
/// is the lowest eigenvector of `<phi|A|phi>_B` and vice versa, so the
/// objective never increases. Starts are independent and evaluated in
/// parallel; the result is the `(value, start index)` minimum, which makes it
/// independent of scheduling. The value is an upper bound on the true
/// minimum that multistart makes tight in practice.
pub fn min_over_separable(
    a: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    cfg: &SolverConfig,
) -> Result<ProductMinimum> {
    min_over_separable_seeded(a, d_a, d_b, cfg, &[])
}

/// As [`min_over_separable`], with the first starts taken from `seeds`
/// (A-side vectors) instead of random draws.
pub fn min_over_separable_seeded(
    a: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    cfg: &SolverConfig,
    seeds: &[Vec<Complex64>],
) -> Result<ProductMinimum> {
    let min = search_product_minimum(a, d_a, d_b, cfg, seeds)?;
    if min.converged_starts == 0 {
        return Err(Error::SolverNoConvergence {
            best_value: min.value,
            iterations: cfg.max_iters,
        });
    }
    Ok(min)
}

/// Multistart search that returns the best point even when no start met
/// `tol_conv`; `converged_starts` tells the caller whether it did.
pub(crate) fn search_product_minimum(
    a: &HermitianOperator,
    d_a: usize,
    d_b: usize,
    cfg: &SolverConfig,
    seeds: &[Vec<Complex64>],
) -> Result<ProductMinimum> {
    cfg.validate()?;
    if a.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch {
            context: "min_over_separable",
            expected: d_a * d_b,
            found: a.dim(),
        });
    }
    let m = a.matrix();
    let n_starts = cfg.n_starts.max(seeds.len());
    let outcomes: Vec<StartOutcome> = (0..n_starts)
        .into_par_iter()
        .map(|idx| alternate_from(m, d_a, d_b, start_vector(idx, seeds, d_a, cfg.seed), cfg))
        .collect::<Result<_>>()?;

    let converged_starts = outcomes.iter().filter(|o| o.converged).count();
    let (start, best) = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, x), (j, y)| x.value.total_cmp(&y.value).then(i.cmp(j)))
        .expect("n_starts > 0");
    let product = tensor_vec(&best.psi, &best.phi);
    let value = m.quadratic_form(&product).re;
    Ok(ProductMinimum {
        value,
        psi: best.psi,
        phi: best.phi,
        start,
        converged_starts,
    })
}

/// The hyperplane operator through `guess`, orthogonal to `guess - target`.
#[derive(Clone, Debug)]
pub struct WitnessCandidate {
    pub operator: HermitianOperator,
    pub guess: DensityMatrix,
    pub target: DensityMatrix,
    /// Coefficient `c = -<g, g - t> / ||g - t||` of the identity shift.
    pub offset_c: f64,
    /// `||g - t||`.
    pub distance: f64,
}

pub fn witness_candidate(
    guess: &DensityMatrix,
    target: &DensityMatrix,
) -> Result<WitnessCandidate> {
    if guess.dim() != target.dim() || guess.d_a() != target.d_a() {
        return Err(Error::DimensionMismatch {
            context: "witness_candidate",
            expected: guess.dim(),
            found: target.dim(),
        });
    }
    let diff = guess.matrix() - target.matrix();
    let distance = hs_norm(&diff);
    if distance <= TAU_EIG {
        return Err(Error::DegenerateWitness { distance });
    }
    let overlap = hs_inner(guess.matrix(), &diff)?.re;
    let offset_c = -overlap / distance;
    let operator = diff
        .scale_real(1.0 / distance)
        .add_scaled(&ComplexMatrix::identity(diff.dim()), offset_c);
    Ok(WitnessCandidate {
        operator: HermitianOperator::new_unchecked(operator),
        guess: guess.clone(),
        target: target.clone(),
        offset_c,
        distance,
    })
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub candidate: WitnessCandidate,
    /// `<target, C>`.
    pub ent_expectation: f64,
    /// `min_{rho in S} <rho, C>`.
    pub sep_minimum: f64,
    pub minimizer: ProductEnsemble,
    pub is_witness: bool,
    pub is_optimal: bool,
}

/// Decides whether `guess` is the nearest separable state to `target` by
/// checking that its hyperplane operator is an entanglement witness.
pub fn verify_nearest_separable(
    guess: &DensityMatrix,
    target: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<WitnessReport> {
    let candidate = witness_candidate(guess, target)?;
    let ent_expectation = candidate.operator.expectation(target.matrix())?;
    let min = min_over_separable(&candidate.operator, guess.d_a(), guess.d_b(), cfg)?;
    let sep_minimum = min.value;
    let is_witness = ent_expectation < -TAU_WIT && sep_minimum >= -TAU_WIT;
    let is_optimal = is_witness && sep_minimum.abs() <= TAU_WIT;
    Ok(WitnessReport {
        minimizer: min.to_ensemble(),
        candidate,
        ent_expectation,
        sep_minimum,
        is_witness,
        is_optimal,
    })
}

/// `A_opt = (d-1)/(d sqrt(d^2-1)) (1 - d/(2(d-1)) Gamma)`, the optimal
/// witness for every entangled isotropic state of dimension `d`.
pub fn optimal_witness_isotropic(p: IsotropicParams) -> Result<HermitianOperator> {
    if !p.is_entangled() {
        return Err(Error::SeparableRegime {
            d: p.d(),
            alpha: p.alpha(),
            threshold: IsotropicParams::threshold(p.d()),
        });
    }
    optimal_witness_for_dim(p.d())
}

pub(crate) fn optimal_witness_for_dim(d: usize) -> Result<HermitianOperator> {
    let df = d as f64;
    let prefactor = (df - 1.0) / (df * (df * df - 1.0).sqrt());
    let gamma = gamma_operator(d)?;
    let m = ComplexMatrix::identity(d * d)
        .add_scaled(gamma.matrix(), -df / (2.0 * (df - 1.0)))
        .scale_real(prefactor);
    Ok(HermitianOperator::new_unchecked(m))
}

fn check_unit(name: &'static str, v: &[f64; 3]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TAU_EIG {
        return Err(Error::NonUnitVector { name, norm });
    }
    Ok(())
}

fn dot_sigma(v: &[f64; 3]) -> ComplexMatrix {
    let p = pauli_basis();
    let mut m = ComplexMatrix::zeros(2);
    for (x, g) in v.iter().zip(p.generators()) {
        m.add_scaled_assign(g.matrix(), *x);
    }
    m
}

/// Measurement directions of a CHSH experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub a: [f64; 3],
    pub a_prime: [f64; 3],
    pub b: [f64; 3],
    pub b_prime: [f64; 3],
}

/// `B = a.s (x) (b + b').s + a'.s (x) (b - b').s`; CHSH reads `<rho, 2 - B> >= 0`.
pub fn chsh_operator(s: &ChshSettings) -> Result<HermitianOperator> {
    check_unit("a", &s.a)?;
    check_unit("a'", &s.a_prime)?;
    check_unit("b", &s.b)?;
    check_unit("b'", &s.b_prime)?;
    let sum: [f64; 3] = std::array::from_fn(|i| s.b[i] + s.b_prime[i]);
    let diff: [f64; 3] = std::array::from_fn(|i| s.b[i] - s.b_prime[i]);
    let m = crate::linalg::tensor_product(&dot_sigma(&s.a), &dot_sigma(&sum)).add_scaled(
        &crate::linalg::tensor_product(&dot_sigma(&s.a_prime), &dot_sigma(&diff)),
        1.0,
    );
    Ok(HermitianOperator::new_unchecked(m))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshOptimum {
    /// `Tr(rho B)` at `settings`.
    pub value: f64,
    pub settings: ChshSettings,
}

fn normalized3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-14).then(|| v.map(|x| x / n))
}

fn mat3_vec(t: &[[f64; 3]; 3], v: &[f64; 3], transpose: bool) -> [f64; 3] {
    std::array::from_fn(|i| {
        (0..3)
            .map(|j| {
                if transpose {
                    t[j][i] * v[j]
                } else {
                    t[i][j] * v[j]
                }
            })
            .sum()
    })
}

/// Maximizes `Tr(rho B)` over the four unit vectors of a two-qubit state.
///
/// With `T_ij = Tr(rho s_i (x) s_j)` the objective is
/// `a.T(b + b') + a'.T(b - b')`, which is linear in each vector separately;
/// block-coordinate ascent from seeded random starts converges quickly.
pub fn chsh_max(rho: &DensityMatrix, n_starts: usize, seed: u64) -> Result<ChshOptimum> {
    if rho.d_a() != 2 || rho.d_b() != 2 {
        return Err(Error::DimensionMismatch {
            context: "chsh_max (two qubits)",
            expected: 4,
            found: rho.dim(),
        });
    }
    if n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be positive".into()));
    }
    let p = pauli_basis();
    let mut t = [[0.0; 3]; 3];
    for (i, gi) in p.generators().iter().enumerate() {
        for (j, gj) in p.generators().iter().enumerate() {
            let op = crate::linalg::tensor_product(gi.matrix(), gj.matrix());
            t[i][j] = hs_inner(rho.matrix(), &op)?.re;
        }
    }
    let objective = |s: &ChshSettings| -> f64 {
        let sum: [f64; 3] = std::array::from_fn(|i| s.b[i] + s.b_prime[i]);
        let diff: [f64; 3] = std::array::from_fn(|i| s.b[i] - s.b_prime[i]);
        let x = mat3_vec(&t, &sum, false);
        let y = mat3_vec(&t, &diff, false);
        (0..3).map(|i| s.a[i] * x[i] + s.a_prime[i] * y[i]).sum()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_dir = || -> [f64; 3] {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            if let Some(u) = normalized3(v) {
                return u;
            }
        }
    };

    let mut best: Option<ChshSettings> = None;
    let mut best_value = f64::NEG_INFINITY;
    for _ in 0..n_starts {
        let mut s = ChshSettings {
            a: random_dir(),
            a_prime: random_dir(),
            b: random_dir(),
            b_prime: random_dir(),
        };
        let mut value = objective(&s);
        for _ in 0..1000 {
            let sum: [f64; 3] = std::array::from_fn(|i| s.b[i] + s.b_prime[i]);
            let diff: [f64; 3] = std::array::from_fn(|i| s.b[i] - s.b_prime[i]);
            if let Some(u) = normalized3(mat3_vec(&t, &sum, false)) {
                s.a = u;
            }
            if let Some(u) = normalized3(mat3_vec(&t, &diff, false)) {
                s.a_prime = u;
            }
            let plus: [f64; 3] = std::array::from_fn(|i| s.a[i] + s.a_prime[i]);
            let minus: [f64; 3] = std::array::from_fn(|i| s.a[i] - s.a_prime[i]);
            if let Some(u) = normalized3(mat3_vec(&t, &plus, true)) {
                s.b = u;
            }
            if let Some(u) = normalized3(mat3_vec(&t, &minus, true)) {
                s.b_prime = u;
            }
            let next = objective(&s);
            let gain = next - value;
            value = next;
            if gain < 1e-14 {
                break;
            }
        }
        if value > best_value {
            best_value = value;
            best = Some(s);
        }
    }
    let settings = best.expect("n_starts > 0");
    let value = chsh_operator(&settings)?.expectation(rho.matrix())?;
    Ok(ChshOptimum { value, settings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::isotropic;

    fn iso(d: usize, alpha: f64) -> DensityMatrix {
        isotropic(IsotropicParams::new(d, alpha).unwrap())
    }

    fn sigma() -> ComplexMatrix {
        gamma_operator(2).unwrap().into_matrix()
    }

    fn lambda() -> ComplexMatrix {
        gamma_operator(3).unwrap().into_matrix()
    }

    #[test]
    fn qubit_candidate_closed_form() {
        let expected = ComplexMatrix::identity(4)
            .add_scaled(&sigma(), -1.0)
            .scale_real(1.0 / (2.0 * 3f64.sqrt()));
        for alpha in [0.4, 0.7, 1.0] {
            let guess = iso(2, 1.0 / 3.0);
            let target = iso(2, alpha);
            let c = witness_candidate(&guess, &target).unwrap();
            assert!(c.operator.matrix().max_abs_diff(&expected) < 1e-12);
            let overlap = hs_inner(guess.matrix(), &(guess.matrix() - target.matrix()))
                .unwrap()
                .re;
            assert!((overlap - 0.25 * (1.0 / 3.0 - alpha)).abs() < 1e-14);
            assert!((c.distance - 3f64.sqrt() / 2.0 * (alpha - 1.0 / 3.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn qutrit_candidate_closed_form() {
        let expected = ComplexMatrix::identity(9)
            .add_scaled(&lambda(), -0.75)
            .scale_real(1.0 / (3.0 * 2f64.sqrt()));
        let c = witness_candidate(&iso(3, 0.25), &iso(3, 0.9)).unwrap();
        assert!(c.operator.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn candidate_invariants() {
        let guess = DensityMatrix::maximally_mixed(3, 3);
        let target = iso(3, 0.6);
        let c = witness_candidate(&guess, &target).unwrap();
        let on_guess = c.operator.expectation(guess.matrix()).unwrap();
        assert!(on_guess.abs() < TAU_EIG);
        let diff = guess.matrix() - target.matrix();
        let along = hs_inner(&diff, c.operator.matrix()).unwrap().re;
        assert!((along - hs_norm(&diff)).abs() < TAU_EIG);
        let on_target = c.operator.expectation(target.matrix()).unwrap();
        assert!((on_target + c.distance).abs() < TAU_EIG);
    }

    #[test]
    fn degenerate_candidate_is_rejected() {
        let rho = iso(2, 0.5);
        assert!(matches!(
            witness_candidate(&rho, &rho),
            Err(Error::DegenerateWitness { .. })
        ));
    }

    #[test]
    fn identity_minimum_is_one() {
        let cfg = SolverConfig::default();
        let m = min_over_separable(&HermitianOperator::identity(6), 2, 3, &cfg).unwrap();
        assert!((m.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zz_minimum() {
        let zz = HermitianOperator::new(ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]))
            .unwrap();
        let m = min_over_separable(&zz, 2, 2, &SolverConfig::default()).unwrap();
        assert!((m.value + 1.0).abs() < 1e-12);
        // |0>|1> or |1>|0>
        let p0 = m.psi[0].norm_sqr();
        let q0 = m.phi[0].norm_sqr();
        assert!((p0 - (1.0 - q0)).abs() < 1e-6);
    }

    #[test]
    fn qubit_optimal_witness_is_tangent() {
        let a = optimal_witness_isotropic(IsotropicParams::new(2, 0.8).unwrap()).unwrap();
        let m = min_over_separable(&a, 2, 2, &SolverConfig::default()).unwrap();
        assert!(m.value.abs() < TAU_WIT, "{}", m.value);
        // the minimizer has Bloch vectors with -n_x m_x + n_y m_y - n_z m_z = -1
        let p = pauli_basis();
        let bloch = |v: &[Complex64]| -> Vec<f64> {
            p.generators()
                .iter()
                .map(|g| g.matrix().quadratic_form(v).re)
                .collect()
        };
        let (n, mm) = (bloch(&m.psi), bloch(&m.phi));
        let flipped = -n[0] * mm[0] + n[1] * mm[1] - n[2] * mm[2];
        assert!((flipped + 1.0).abs() < 1e-6);
    }

    #[test]
    fn optimal_witness_closed_forms() {
        let a2 = optimal_witness_isotropic(IsotropicParams::new(2, 0.5).unwrap()).unwrap();
        let e2 = ComplexMatrix::identity(4)
            .add_scaled(&sigma(), -1.0)
            .scale_real(1.0 / (2.0 * 3f64.sqrt()));
        assert!(a2.matrix().max_abs_diff(&e2) < 1e-14);
        let a3 = optimal_witness_isotropic(IsotropicParams::new(3, 0.5).unwrap()).unwrap();
        let e3 = ComplexMatrix::identity(9)
            .add_scaled(&lambda(), -0.75)
            .scale_real(1.0 / (3.0 * 2f64.sqrt()));
        assert!(a3.matrix().max_abs_diff(&e3) < 1e-14);

        // d = 4: 3/(4 sqrt 15) (1 - 2/3 Gamma), and equal to the candidate from rho_{1/5}
        let a4 = optimal_witness_isotropic(IsotropicParams::new(4, 0.5).unwrap()).unwrap();
        let g4 = gamma_operator(4).unwrap().into_matrix();
        let e4 = ComplexMatrix::identity(16)
            .add_scaled(&g4, -2.0 / 3.0)
            .scale_real(3.0 / (4.0 * 15f64.sqrt()));
        assert!(a4.matrix().max_abs_diff(&e4) < 1e-14);
        let c4 = witness_candidate(&iso(4, 0.2), &iso(4, 0.7)).unwrap();
        assert!(a4.matrix().max_abs_diff(c4.operator.matrix()) < 1e-12);

        assert!(matches!(
            optimal_witness_isotropic(IsotropicParams::new(2, 0.2).unwrap()),
            Err(Error::SeparableRegime { .. })
        ));
    }

    #[test]
    fn verify_true_guess() {
        let cfg = SolverConfig::default();
        let r = verify_nearest_separable(&iso(2, 1.0 / 3.0), &iso(2, 0.8), &cfg).unwrap();
        assert!(r.is_witness && r.is_optimal);
        let expected = -(3f64.sqrt() / 2.0) * (0.8 - 1.0 / 3.0);
        assert!((r.ent_expectation - expected).abs() < 1e-12);

        let r = verify_nearest_separable(&iso(3, 0.25), &iso(3, 1.0), &cfg).unwrap();
        assert!(r.is_witness);
        assert!((r.ent_expectation + 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn verify_wrong_guess() {
        let cfg = SolverConfig::default();
        let r = verify_nearest_separable(&DensityMatrix::maximally_mixed(2, 2), &iso(2, 0.8), &cfg)
            .unwrap();
        assert!(!r.is_witness);
        assert!(r.sep_minimum < -TAU_WIT);
    }

    #[test]
    fn shift_moves_expectations_by_kappa() {
        let cfg = SolverConfig::default();
        let a = optimal_witness_for_dim(3).unwrap();
        let kappa = 0.37;
        let shifted = a.shifted(kappa);
        let m0 = min_over_separable(&a, 3, 3, &cfg).unwrap().value;
        let m1 = min_over_separable(&shifted, 3, 3, &cfg).unwrap().value;
        assert!((m1 - m0 - kappa).abs() < 1e-10);
        let rho = iso(3, 0.6);
        let e0 = a.expectation(rho.matrix()).unwrap();
        let e1 = shifted.expectation(rho.matrix()).unwrap();
        assert!((e1 - e0 - kappa).abs() < 1e-14);
    }

    #[test]
    fn more_starts_never_worse() {
        let a = HermitianOperator::new(
            DensityMatrix::maximally_mixed(3, 3)
                .matrix()
                .add_scaled(iso(3, 1.0).matrix(), -1.0),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for n in [1, 4, 16, 64] {
            let cfg = SolverConfig {
                n_starts: n,
                ..Default::default()
            };
            let v = min_over_separable(&a, 3, 3, &cfg).unwrap().value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let a = optimal_witness_for_dim(3).unwrap();
        let cfg = SolverConfig {
            seed: 42,
            ..Default::default()
        };
        let x = min_over_separable(&a, 3, 3, &cfg).unwrap();
        let y = min_over_separable(&a, 3, 3, &cfg).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn solver_rejects_bad_input() {
        let a = HermitianOperator::identity(4);
        assert!(min_over_separable(&a, 2, 3, &SolverConfig::default()).is_err());
        let cfg = SolverConfig {
            n_starts: 0,
            ..Default::default()
        };
        assert!(matches!(
            min_over_separable(&a, 2, 2, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn chsh_tsirelson_configuration() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let settings = ChshSettings {
            a: [1.0, 0.0, 0.0],
            a_prime: [0.0, 1.0, 0.0],
            b: [s, -s, 0.0],
            b_prime: [s, s, 0.0],
        };
        // sign of the y-components compensates the -sy(x)sy correlation of |phi+>
        let b = chsh_operator(&settings).unwrap();
        let phi = iso(2, 1.0);
        assert!((b.expectation(phi.matrix()).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(2, 2);
        assert!(b.expectation(mixed.matrix()).unwrap().abs() < 1e-15);
        let bad = ChshSettings {
            a: [1.0, 1.0, 0.0],
            ..settings
        };
        assert!(matches!(
            chsh_operator(&bad),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn chsh_max_isotropic() {
        for alpha in [0.5, 0.8, 1.0] {
            let opt = chsh_max(&iso(2, alpha), 16, 0).unwrap();
            assert!(
                (opt.value - 2.0 * 2f64.sqrt() * alpha).abs() < 1e-9,
                "{}",
                opt.value
            );
        }
    }
}
