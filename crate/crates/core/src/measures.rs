//! Hilbert-Schmidt measure of entanglement and maximal violation of the
//! generalized Bell inequality.
//!
//! The numeric route projects a target onto the separable set with a
//! conditional-gradient scheme whose linear subproblem is
//! [`min_over_separable`]. The closed forms for isotropic states serve as
//! the reference the numeric route is checked against.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hs_inner, hs_norm, inner, ComplexMatrix, HermitianOperator};
use crate::report::format_sig;
use crate::states::{DensityMatrix, IsotropicParams, ProductEnsemble, ProductTerm};
use crate::witness::{min_over_separable, search_product_minimum, witness_candidate, SolverConfig};

/// Tolerance on `|D - B|` when comparing the measure with the violation.
pub const TAU_BNT: f64 = 5e-4;

pub fn hs_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            context: "hs_distance",
            expected: r1.dim(),
            found: r2.dim(),
        });
    }
    Ok(hs_norm(&(r1.matrix() - r2.matrix())))
}

/// `D = sqrt(d^2 - 1)/d (alpha - 1/(d+1))`, attained at `rho_{1/(d+1)}`.
/// Zero on the boundary; an error strictly inside the separable region.
pub fn hs_measure_isotropic(p: IsotropicParams) -> Result<f64> {
    let d = p.d() as f64;
    let threshold = IsotropicParams::threshold(p.d());
    if p.alpha() < threshold - 1e-12 {
        return Err(Error::SeparableRegime {
            d: p.d(),
            alpha: p.alpha(),
            threshold,
        });
    }
    Ok(((d * d - 1.0).sqrt() / d * (p.alpha() - threshold)).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionConfig {
    pub tol_gap: f64,
    pub max_outer_iters: usize,
    /// Re-optimize the weights of the active product states after every
    /// outer step (fully corrective; drops atoms that lose all weight).
    pub away_steps: bool,
    /// Atoms whose weight falls below this are dropped.
    pub prune_below: f64,
    pub solver: SolverConfig,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            tol_gap: 1e-9,
            max_outer_iters: 5000,
            away_steps: true,
            prune_below: 1e-12,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureResult {
    pub distance: f64,
    pub nearest: ProductEnsemble,
    /// Frank-Wolfe gap of the final iterate; bounds
    /// `distance^2 - D^2` from above when the linear step is exact.
    pub gap_certificate: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MeasureResult {
    pub fn nearest_density(&self) -> DensityMatrix {
        self.nearest.to_density()
    }
}

struct Atom {
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
    projector: ComplexMatrix,
    /// `<P, target>`.
    overlap: f64,
    weight: f64,
}

impl Atom {
    fn new(psi: Vec<Complex64>, phi: Vec<Complex64>, target: &ComplexMatrix) -> Self {
        let projector =
            crate::linalg::tensor_product(&ComplexMatrix::outer(&psi), &ComplexMatrix::outer(&phi));
        let overlap = hs_inner(&projector, target).expect("same dims").re;
        Self {
            psi,
            phi,
            projector,
            overlap,
            weight: 0.0,
        }
    }

    /// `<P_self, P_other> = |<psi|psi'>|^2 |<phi|phi'>|^2`.
    fn gram(&self, other: &Atom) -> f64 {
        inner(&self.psi, &other.psi).norm_sqr() * inner(&self.phi, &other.phi).norm_sqr()
    }
}

struct ActiveSet {
    atoms: Vec<Atom>,
    /// Gram matrix of the atoms, row-major with stride `atoms.len()`.
    gram: Vec<Vec<f64>>,
}

impl ActiveSet {
    fn push(&mut self, atom: Atom) -> usize {
        let row: Vec<f64> = self.atoms.iter().map(|a| a.gram(&atom)).collect();
        for (r, g) in self.gram.iter_mut().zip(&row) {
            r.push(*g);
        }
        let mut new_row = row;
        new_row.push(atom.gram(&atom));
        self.gram.push(new_row);
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn iterate(&self, dim: usize) -> ComplexMatrix {
        let mut x = ComplexMatrix::zeros(dim);
        for a in &self.atoms {
            x.add_scaled_assign(&a.projector, a.weight);
        }
        x
    }

    /// Exact minimization of `||sum_k w_k P_k - target||^2` over the simplex
    /// of the current atoms: Wolfe's minimum-norm-point method on the points
    /// `P_k - target`. The corral it maintains stays affinely independent, so
    /// the small linear solves remain well posed when atoms nearly coincide.
    fn reoptimize_weights(&mut self, target_norm2: f64, tol: f64) {
        let n = self.atoms.len();
        let q: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        self.gram[k][l] - self.atoms[k].overlap - self.atoms[l].overlap
                            + target_norm2
                    })
                    .collect()
            })
            .collect();
        let diag: Vec<f64> = (0..n).map(|k| q[k][k]).collect();
        let Some(start) = argmin(&diag, |_| true) else {
            return;
        };
        let mut corral = vec![start];
        let mut lambda = vec![1.0];
        'major: for _ in 0..10 * n + 100 {
            let xp: Vec<f64> = (0..n)
                .map(|k| corral.iter().zip(&lambda).map(|(&c, &l)| l * q[c][k]).sum())
                .collect();
            let xx: f64 = corral.iter().zip(&lambda).map(|(&c, &l)| l * xp[c]).sum();
            let Some(j) = argmin(&xp, |k| !corral.contains(&k)) else {
                break;
            };
            if xx - xp[j] <= tol {
                break;
            }
            corral.push(j);
            lambda.push(0.0);
            loop {
                let Some(alpha) = affine_minimizer(&corral, &q) else {
                    // j is affinely dependent on the corral to working precision
                    corral.pop();
                    lambda.pop();
                    break 'major;
                };
                if alpha.iter().all(|&a| a > 0.0) {
                    lambda = alpha;
                    break;
                }
                // walk from lambda toward alpha until the first weight hits zero
                let (hit, theta) = lambda
                    .iter()
                    .zip(&alpha)
                    .enumerate()
                    .filter(|(_, (_, &a))| a <= 0.0)
                    .map(|(i, (&l, &a))| (i, l / (l - a)))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .expect("some alpha is nonpositive");
                for (l, a) in lambda.iter_mut().zip(&alpha) {
                    *l += theta * (a - *l);
                }
                lambda[hit] = 0.0;
                let mut keep = lambda.iter().map(|&l| l > 0.0);
                corral.retain(|_| keep.next().unwrap());
                lambda.retain(|&l| l > 0.0);
                let total: f64 = lambda.iter().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
            }
        }
        for a in &mut self.atoms {
            a.weight = 0.0;
        }
        for (&c, &l) in corral.iter().zip(&lambda) {
            self.atoms[c].weight = l;
        }
    }

    fn prune(&mut self, below: f64) {
        let keep: Vec<bool> = self.atoms.iter().map(|a| a.weight > below).collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut idx = 0;
        self.atoms.retain(|_| {
            idx += 1;
            keep[idx - 1]
        });
        let kept: Vec<usize> = keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect();
        self.gram = kept
            .iter()
            .map(|&i| kept.iter().map(|&j| self.gram[i][j]).collect())
            .collect();
        let total: f64 = self.atoms.iter().map(|a| a.weight).sum();
        for a in &mut self.atoms {
            a.weight /= total;
        }
    }

    fn to_ensemble(&self, d_a: usize, d_b: usize) -> ProductEnsemble {
        let total: f64 = self.atoms.iter().map(|a| a.weight).sum();
        let terms = self
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| ProductTerm {
                weight: (a.weight / total).min(1.0),
                psi: a.psi.clone(),
                phi: a.phi.clone(),
            })
            .collect();
        ProductEnsemble::new(d_a, d_b, terms).expect("weights form a distribution")
    }
}

/// Weights of the point of minimal norm in the affine hull of `corral`:
/// `[Q 1; 1^T 0] [a; mu] = [0; 1]`.
fn affine_minimizer(corral: &[usize], q: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = corral.len();
    let kkt = DMatrix::from_fn(m + 1, m + 1, |i, j| match (i < m, j < m) {
        (true, true) => q[corral[i]][corral[j]],
        (false, false) => 0.0,
        _ => 1.0,
    });
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let alpha: Vec<f64> = sol.iter().take(m).copied().collect();
    alpha.iter().all(|a| a.is_finite()).then_some(alpha)
}

fn argmin(v: &[f64], allowed: impl Fn(usize) -> bool) -> Option<usize> {
    (0..v.len())
        .filter(|&k| allowed(k))
        .min_by(|&i, &j| v[i].total_cmp(&v[j]).then(i.cmp(&j)))
}

/// Nearest separable state to `target` in Hilbert-Schmidt norm.
///
/// Conditional gradient over the convex hull of pure product states: each
/// outer step asks [`min_over_separable`] for the product state minimizing
/// `<P, 2 (x - target)>`, moves toward it with an exact line search and then
/// re-optimizes the weights of all active atoms. The loop stops once the
/// Frank-Wolfe gap `<x - P, 2 (x - target)>` drops below `tol_gap`.
pub fn nearest_separable(target: &DensityMatrix, cfg: &ProjectionConfig) -> Result<MeasureResult> {
    cfg.solver.validate()?;
    if cfg.tol_gap.is_nan() || cfg.tol_gap <= 0.0 || cfg.max_outer_iters == 0 {
        return Err(Error::InvalidConfig(
            "tol_gap and max_outer_iters must be positive".into(),
        ));
    }
    let (d_a, d_b) = (target.d_a(), target.d_b());
    let dim = target.dim();
    let sigma = target.matrix();
    let sigma_norm2 = hs_norm(sigma).powi(2);

    // start from the product state with the largest overlap with the target
    let neg_target = HermitianOperator::new_unchecked(sigma.scale_real(-1.0));
    let first = min_over_separable(&neg_target, d_a, d_b, &cfg.solver)?;
    let mut active = ActiveSet {
        atoms: Vec::new(),
        gram: Vec::new(),
    };
    let k = active.push(Atom::new(first.psi, first.phi, sigma));
    active.atoms[k].weight = 1.0;

    let mut gap = f64::INFINITY;
    let mut last_psi: Option<Vec<Complex64>> = None;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_outer_iters {
        iterations += 1;
        let x = active.iterate(dim);
        let grad = (&x - sigma).scale_real(2.0);
        let grad_op = HermitianOperator::new_unchecked(grad.clone());

        let solver = SolverConfig {
            seed: cfg.solver.seed.wrapping_add(iterations as u64),
            ..cfg.solver
        };
        let seeds: Vec<Vec<Complex64>> = last_psi.iter().cloned().collect();
        // an unconverged search still yields a feasible vertex; the gap decides
        let vertex = search_product_minimum(&grad_op, d_a, d_b, &solver, &seeds)?;
        let x_dot_grad = hs_inner(&x, &grad)?.re;
        gap = x_dot_grad - vertex.value;
        if gap <= cfg.tol_gap {
            converged = true;
            break;
        }
        last_psi = Some(vertex.psi.clone());

        let v = active.push(Atom::new(vertex.psi, vertex.phi, sigma));
        // exact line search along v - x: f(x + g (v - x)) is quadratic in g
        let dir = &active.atoms[v].projector - &x;
        let dir_norm2 = hs_norm(&dir).powi(2);
        let step = if dir_norm2 > 0.0 {
            (gap / (2.0 * dir_norm2)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        for (i, a) in active.atoms.iter_mut().enumerate() {
            a.weight *= 1.0 - step;
            if i == v {
                a.weight += step;
            }
        }
        if cfg.away_steps {
            active.reoptimize_weights(sigma_norm2, cfg.tol_gap * 1e-3);
        }
        active.prune(cfg.prune_below);
    }

    let nearest = active.to_ensemble(d_a, d_b);
    let distance = hs_norm(&(nearest.to_density().matrix() - sigma));
    let result = MeasureResult {
        distance,
        nearest,
        gap_certificate: gap,
        iterations,
        converged,
    };
    if !converged {
        return Err(Error::ProjectionNoConvergence {
            partial: Box::new(result),
        });
    }
    Ok(result)
}

/// `min_{rho in S} <rho, A> - <target, A>` for a supplied witness `A`.
pub fn gbi_violation(
    target: &DensityMatrix,
    witness_op: &HermitianOperator,
    cfg: &SolverConfig,
) -> Result<f64> {
    if witness_op.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            context: "gbi_violation",
            expected: target.dim(),
            found: witness_op.dim(),
        });
    }
    let min = min_over_separable(witness_op, target.d_a(), target.d_b(), cfg)?;
    Ok(min.value - witness_op.expectation(target.matrix())?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BntReport {
    /// Hilbert-Schmidt measure from the numeric projection.
    pub d_value: f64,
    /// GBI violation of the witness built from the projection.
    pub b_value: f64,
    pub discrepancy: f64,
    pub measure: MeasureResult,
}

/// Computes the measure `D` numerically, builds the hyperplane witness from
/// the nearest state found and evaluates its GBI violation `B`.
pub fn bnt_check(target: &DensityMatrix, cfg: &ProjectionConfig) -> Result<BntReport> {
    let measure = nearest_separable(target, cfg)?;
    bnt_from_measure(target, measure, &cfg.solver)
}

pub fn bnt_from_measure(
    target: &DensityMatrix,
    measure: MeasureResult,
    solver: &SolverConfig,
) -> Result<BntReport> {
    let candidate = witness_candidate(&measure.nearest_density(), target)?;
    let b_value = gbi_violation(target, &candidate.operator, solver)?;
    let d_value = measure.distance;
    Ok(BntReport {
        d_value,
        b_value,
        discrepancy: (d_value - b_value).abs(),
        measure,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub d: usize,
    pub alpha: f64,
    pub threshold: f64,
    /// Zero for separable alpha.
    pub distance: f64,
}

/// Closed-form `D(d, alpha)` for `d = 2..=d_max`; the separable window
/// `1/(d+1)` shrinks and `D` approaches `alpha` as `d` grows.
pub fn infinite_d_trend(alphas: &[f64], d_max: usize) -> Result<Vec<TrendRow>> {
    if d_max < 2 {
        return Err(Error::InvalidDimension {
            dim: d_max,
            reason: "d_max must be at least 2",
        });
    }
    let mut rows = Vec::with_capacity(alphas.len() * (d_max - 1));
    for d in 2..=d_max {
        for &alpha in alphas {
            let p = IsotropicParams::new(d, alpha)?;
            let threshold = IsotropicParams::threshold(d);
            let distance = if p.alpha() <= threshold {
                0.0
            } else {
                hs_measure_isotropic(p)?
            };
            rows.push(TrendRow {
                d,
                alpha,
                threshold,
                distance,
            });
        }
    }
    Ok(rows)
}

/// One line of the measure table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureRow {
    pub d: usize,
    pub alpha: Option<f64>,
    pub d_closed: Option<f64>,
    pub d_numeric: Option<f64>,
    pub b: Option<f64>,
    pub discrepancy: Option<f64>,
    pub gap: Option<f64>,
    pub iters: Option<usize>,
    pub converged: bool,
}

impl MeasureRow {
    pub const CSV_HEADER: [&'static str; 8] = [
        "d",
        "alpha",
        "D_closed",
        "D_numeric",
        "B",
        "discrepancy",
        "gap",
        "iters",
    ];

    /// Fields in [`Self::CSV_HEADER`] order; missing values are empty.
    pub fn csv_fields(&self) -> Vec<String> {
        let f = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
        vec![
            self.d.to_string(),
            f(self.alpha),
            f(self.d_closed),
            f(self.d_numeric),
            f(self.b),
            f(self.discrepancy),
            f(self.gap),
            self.iters.map(|i| i.to_string()).unwrap_or_default(),
        ]
    }
}
