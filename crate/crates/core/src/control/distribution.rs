//! Box-constrained minimum-norm tension distribution.
//!
//! Solves
//!
//! ```text
//! minimize ½‖f‖²  subject to  A f = b,  0 ≤ f ≤ u
//! ```
//!
//! for a 3×k structure matrix `A` by semismooth Newton on the three-variable
//! dual. For a multiplier `λ` the primal minimizer is `f(λ) = clip(Aᵀλ, 0, u)`
//! and the dual gradient is `b − A f(λ)`; the generalized Hessian only involves
//! wires strictly inside their bounds. Infeasibility is certified by a
//! separating direction: if `λᵀb > Σ uᵢ·max(0, (Aᵀλ)ᵢ)` no admissible tension
//! vector can produce `b`.

use nalgebra::{Matrix3, Matrix3xX, SymmetricEigen, Vector3};
use thiserror::Error;

const MAX_ITERATIONS: usize = 200;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("no tensions within [0, f_max] produce the requested force")]
    Infeasible,
    #[error("tension distribution did not converge (residual {residual:e} N)")]
    NotConverged { residual: f64 },
    #[error("{columns} wires but {bounds} tension limits")]
    Arity { columns: usize, bounds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub tensions: Vec<f64>,
    /// `‖A f − b‖∞` at the returned tensions.
    pub residual: f64,
    pub iterations: usize,
}

struct Dual<'a> {
    a: &'a Matrix3xX<f64>,
    b: &'a Vector3<f64>,
    upper: &'a [f64],
}

impl Dual<'_> {
    fn primal(&self, lambda: &Vector3<f64>) -> Vec<f64> {
        let s = self.a.tr_mul(lambda);
        s.iter().zip(self.upper).map(|(&s, &u)| s.clamp(0.0, u)).collect()
    }

    fn value(&self, lambda: &Vector3<f64>) -> f64 {
        let s = self.a.tr_mul(lambda);
        let conj: f64 = s
            .iter()
            .zip(self.upper)
            .map(|(&s, &u)| {
                if s <= 0.0 {
                    0.0
                } else if s < u {
                    0.5 * s * s
                } else {
                    u * s - 0.5 * u * u
                }
            })
            .sum();
        lambda.dot(self.b) - conj
    }

    fn gradient(&self, f: &[f64]) -> Vector3<f64> {
        let mut af = Vector3::zeros();
        for (i, &fi) in f.iter().enumerate() {
            af += self.a.column(i) * fi;
        }
        self.b - af
    }

    /// `λᵀb − h(λ)` where `h` is the support function of the reachable force set.
    fn separation(&self, lambda: &Vector3<f64>) -> f64 {
        let s = self.a.tr_mul(lambda);
        let support: f64 = s.iter().zip(self.upper).map(|(&s, &u)| u * s.max(0.0)).sum();
        lambda.dot(self.b) - support
    }

    fn hessian(&self, lambda: &Vector3<f64>) -> Matrix3<f64> {
        let s = self.a.tr_mul(lambda);
        let mut h = Matrix3::zeros();
        for (i, (&s, &u)) in s.iter().zip(self.upper).enumerate() {
            if s > 0.0 && s < u {
                let c = self.a.column(i);
                h += c * c.transpose();
            }
        }
        h
    }
}

/// Minimum-norm tensions in `[0, upper]` whose combined force equals `target`.
pub fn min_norm_tensions(
    a: &Matrix3xX<f64>,
    target: &Vector3<f64>,
    upper: &[f64],
) -> Result<Distribution, DistributionError> {
    if a.ncols() != upper.len() {
        return Err(DistributionError::Arity { columns: a.ncols(), bounds: upper.len() });
    }
    let dual = Dual { a, b: target, upper };
    let gram = a * a.transpose();
    // Natural curvature scale used for directions the active set leaves flat.
    let scale = (gram.trace() / a.ncols().max(1) as f64).max(f64::MIN_POSITIVE);
    let force_scale = 1.0 + target.norm() + upper.iter().fold(0.0f64, |m, &u| m.max(u));
    let tol = 1e-11 * force_scale;
    let separation_tol = 1e-9 * force_scale;

    // Unconstrained minimum-norm multipliers.
    let mut lambda = pseudo_solve(&gram, target, 1e-12 * gram.norm().max(1e-300), 1.0 / scale);
    let mut f = dual.primal(&lambda);
    let mut g = dual.gradient(&f);
    let mut value = dual.value(&lambda);

    for iteration in 0..MAX_ITERATIONS {
        let residual = g.amax();
        if residual <= tol {
            return Ok(Distribution { tensions: f, residual, iterations: iteration });
        }
        if lambda.norm() > 0.0 && dual.separation(&lambda) > separation_tol * lambda.norm() {
            return Err(DistributionError::Infeasible);
        }

        let h = dual.hessian(&lambda);
        let step = pseudo_solve(&h, &g, 1e-10 * gram.norm().max(1e-300), 1.0 / scale);
        let slope = g.dot(&step);
        if !(slope > 0.0) {
            break;
        }
        let mut alpha = 1.0;
        loop {
            let trial = lambda + step * alpha;
            let trial_value = dual.value(&trial);
            if trial_value >= value + ARMIJO * alpha * slope {
                lambda = trial;
                value = trial_value;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-20 {
                break;
            }
        }
        if alpha < 1e-20 {
            break;
        }
        f = dual.primal(&lambda);
        g = dual.gradient(&f);
    }

    let residual = g.amax();
    if lambda.norm() > 0.0 && dual.separation(&lambda) > separation_tol * lambda.norm() {
        return Err(DistributionError::Infeasible);
    }
    if facet_normals(a).iter().any(|n| dual.separation(n) > separation_tol) {
        return Err(DistributionError::Infeasible);
    }
    // Targets on the boundary of the reachable set approach the solution
    // without a finite dual optimum; accept them once the force error is tiny.
    if residual <= 1e-9 * force_scale {
        return Ok(Distribution { tensions: f, residual, iterations: MAX_ITERATIONS });
    }
    Err(DistributionError::NotConverged { residual })
}

/// Unit normals of every facet the reachable force set can have. The set is a
/// zonotope, so its facets are spanned by pairs of columns; when the columns
/// span less than three dimensions the normals of the span and of its edges
/// are added.
fn facet_normals(a: &Matrix3xX<f64>) -> Vec<Vector3<f64>> {
    let cols: Vec<Vector3<f64>> = a.column_iter().filter_map(|c| c.try_normalize(1e-12)).collect();
    let mut normals = Vec::new();
    let mut push = |n: Vector3<f64>| {
        if let Some(n) = n.try_normalize(1e-9) {
            normals.push(n);
            normals.push(-n);
        }
    };
    let mut plane = None;
    for (i, ci) in cols.iter().enumerate() {
        for cj in &cols[i + 1..] {
            let n = ci.cross(cj);
            if n.norm() > 1e-9 {
                plane.get_or_insert(n);
                push(n);
            }
        }
    }
    // Columns along one line: any perpendicular works as the span normal.
    let plane = plane.or_else(|| {
        cols.first().map(|c| c.cross(&Vector3::x()).try_normalize(1e-6).unwrap_or_else(|| c.cross(&Vector3::y())))
    });
    for c in &cols {
        push(*c);
        if let Some(p) = plane {
            push(p.cross(c));
            push(p);
        }
    }
    if cols.is_empty() {
        for e in [Vector3::x(), Vector3::y(), Vector3::z()] {
            push(e);
        }
    }
    normals
}

/// Solves `m x = rhs` on the range of the symmetric PSD matrix `m`; components
/// along numerically null eigenvectors are scaled by `null_gain` instead.
fn pseudo_solve(m: &Matrix3<f64>, rhs: &Vector3<f64>, cutoff: f64, null_gain: f64) -> Vector3<f64> {
    let eig = SymmetricEigen::new(*m);
    let mut x = Vector3::zeros();
    for i in 0..3 {
        let v = eig.eigenvectors.column(i);
        let proj = v.dot(rhs);
        let mu = eig.eigenvalues[i];
        x += v * if mu > cutoff { proj / mu } else { proj * null_gain };
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vertical(k: usize) -> Matrix3xX<f64> {
        Matrix3xX::from_fn(k, |r, _| if r == 2 { 1.0 } else { 0.0 })
    }

    const WEIGHT: f64 = 44.6 * 9.81;

    #[test]
    fn four_vertical_wires_share_equally() {
        let d = min_norm_tensions(&vertical(4), &Vector3::new(0.0, 0.0, WEIGHT), &[180.0; 4]).unwrap();
        for t in &d.tensions {
            assert!((t - WEIGHT / 4.0).abs() < 1e-9, "{t}");
        }
        assert!((WEIGHT / 4.0 - 109.3815).abs() < 1e-4);
    }

    #[test]
    fn three_vertical_wires() {
        let d = min_norm_tensions(&vertical(3), &Vector3::new(0.0, 0.0, WEIGHT), &[180.0; 3]).unwrap();
        for t in &d.tensions {
            assert!((t - 145.842).abs() < 1e-3, "{t}");
        }
    }

    #[test]
    fn one_vertical_wire_is_infeasible() {
        let r = min_norm_tensions(&vertical(1), &Vector3::new(0.0, 0.0, WEIGHT), &[180.0]);
        assert_eq!(r, Err(DistributionError::Infeasible));
    }

    #[test]
    fn downward_wires_are_infeasible() {
        let a = Matrix3xX::from_column_slice(&[0.0, 0.0, -1.0, 0.1, 0.0, -1.0]);
        let r = min_norm_tensions(&a, &Vector3::new(0.0, 0.0, 100.0), &[180.0; 2]);
        assert_eq!(r, Err(DistributionError::Infeasible));
    }

    #[test]
    fn bounds_push_load_to_other_wires() {
        // One steep and one shallow wire; the steep one saturates first.
        let a = Matrix3xX::from_column_slice(&[
            0.0, 0.0, 1.0, //
            0.6, 0.0, 0.8, //
            -0.6, 0.0, 0.8,
        ]);
        let target = Vector3::new(0.0, 0.0, 350.0);
        let d = min_norm_tensions(&a, &target, &[100.0, 180.0, 180.0]).unwrap();
        assert!((d.tensions[0] - 100.0).abs() < 1e-9);
        assert!((d.tensions[1] - 156.25).abs() < 1e-9);
        assert!((d.tensions[2] - 156.25).abs() < 1e-9);
        let af = &a * nalgebra::DVector::from_vec(d.tensions.clone());
        assert!((af - target).amax() < 1e-9);

        // Same wires cannot reach 400 N: 100 + 0.8 * 2 * 180 = 388.
        let r = min_norm_tensions(&a, &Vector3::new(0.0, 0.0, 400.0), &[100.0, 180.0, 180.0]);
        assert_eq!(r, Err(DistributionError::Infeasible));
    }

    #[test]
    fn zero_target_gives_zero() {
        let d = min_norm_tensions(&vertical(3), &Vector3::zeros(), &[180.0; 3]).unwrap();
        assert!(d.tensions.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn arity_is_checked() {
        let r = min_norm_tensions(&vertical(2), &Vector3::zeros(), &[180.0]);
        assert!(matches!(r, Err(DistributionError::Arity { .. })));
    }
}
