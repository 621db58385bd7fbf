//! Rotation-variant SVD, polar decomposition and the three isotropic invariants.

use crate::real::Real;
use nalgebra::{Matrix3, Vector3};

/// Deformation gradient with its SVD, polar factors and invariants.
///
/// `U` and `V` are proper rotations. A reflection in `F` is folded into the
/// smallest singular value, which is then negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantState<T: Real> {
    pub f: Matrix3<T>,
    pub r: Matrix3<T>,
    pub s: Matrix3<T>,
    pub u: Matrix3<T>,
    pub v: Matrix3<T>,
    pub sigma: Vector3<T>,
    pub i1: T,
    pub i2: T,
    pub i3: T,
}

/// The three invariant gradients as 3×3 matrices (`g = vec(G)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantGradients<T: Real> {
    pub g1: Matrix3<T>,
    pub g2: Matrix3<T>,
    pub g3: Matrix3<T>,
}

/// Eigen-pairs of `∂²I1/∂F²`: `H1 = Σ λᵢ qᵢ qᵢᵀ`, with `qᵢ` stored as 3×3 matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistModes<T: Real> {
    pub q: [Matrix3<T>; 3],
    pub lambda: [T; 3],
}

pub fn svd_polar<T: Real>(f: &Matrix3<T>) -> InvariantState<T> {
    let svd = f.svd(true, true);
    let u0 = svd.u.expect("U requested");
    let vt0 = svd.v_t.expect("V requested");
    let s0 = svd.singular_values;

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| s0[b].partial_cmp(&s0[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = Matrix3::from_columns(&order.map(|k| u0.column(k).into_owned()));
    let mut v = Matrix3::from_columns(&order.map(|k| vt0.row(k).transpose()));
    let mut sigma = Vector3::new(s0[order[0]], s0[order[1]], s0[order[2]]);

    if u.determinant() < T::zero() {
        u.column_mut(2).neg_mut();
        sigma[2] = -sigma[2];
    }
    if v.determinant() < T::zero() {
        v.column_mut(2).neg_mut();
        sigma[2] = -sigma[2];
    }

    let r = u * v.transpose();
    let s = v * Matrix3::from_diagonal(&sigma) * v.transpose();
    InvariantState {
        f: *f,
        r,
        s,
        u,
        v,
        sigma,
        i1: sigma.sum(),
        i2: f.norm_squared(),
        i3: f.determinant(),
    }
}

/// `[f1 × f2, f2 × f0, f0 × f1]`, the gradient of `det F`.
#[inline]
pub fn cofactor<T: Real>(f: &Matrix3<T>) -> Matrix3<T> {
    let (f0, f1, f2) = (f.column(0), f.column(1), f.column(2));
    Matrix3::from_columns(&[f1.cross(&f2), f2.cross(&f0), f0.cross(&f1)])
}

pub fn invariant_gradients<T: Real>(inv: &InvariantState<T>) -> InvariantGradients<T> {
    InvariantGradients {
        g1: inv.r,
        g2: inv.f * T::of(2.0),
        g3: cofactor(&inv.f),
    }
}

/// Smallest admissible `σⱼ + σₖ` in the twist eigenvalues.
pub const TWIST_DENOMINATOR_FLOOR: f64 = 1e-6;

/// Builds `qᵢ = vec(U Tᵢ Vᵀ)/√2` and `λᵢ = 2/(σⱼ + σₖ)` where `Tᵢ` is the
/// antisymmetric generator of rotations about axis `i`.
pub fn twist_modes<T: Real>(u: &Matrix3<T>, v: &Matrix3<T>, sigma: &Vector3<T>) -> TwistModes<T> {
    let z = T::zero();
    let o = T::one();
    let generators = [
        Matrix3::new(z, z, z, z, z, -o, z, o, z),
        Matrix3::new(z, z, o, z, z, z, -o, z, z),
        Matrix3::new(z, -o, z, o, z, z, z, z, z),
    ];
    let inv_sqrt2 = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let floor = T::of(TWIST_DENOMINATOR_FLOOR);
    let pairs = [(1, 2), (0, 2), (0, 1)];
    let vt = v.transpose();
    TwistModes {
        q: generators.map(|t| u * t * vt * inv_sqrt2),
        lambda: pairs.map(|(j, k)| T::of(2.0) / (sigma[j] + sigma[k]).max(floor)),
    }
}

/// `wᵀ H3 w` where `H3 = ∂²det/∂F²`: twice the quadratic coefficient of
/// `det(F + tW)`.
#[inline]
pub fn det_hessian_quadratic<T: Real>(f: &Matrix3<T>, w: &Matrix3<T>) -> T {
    let (f0, f1, f2) = (f.column(0), f.column(1), f.column(2));
    let (w0, w1, w2) = (w.column(0), w.column(1), w.column(2));
    T::of(2.0) * (w0.dot(&w1.cross(&f2)) + w0.dot(&f1.cross(&w2)) + f0.dot(&w1.cross(&w2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &Matrix3<f64>, b: &Matrix3<f64>, tol: f64) -> bool {
        (a - b).abs().max() <= tol
    }

    #[test]
    fn identity() {
        let s = svd_polar(&Matrix3::<f64>::identity());
        assert_eq!(s.sigma, Vector3::new(1.0, 1.0, 1.0));
        assert!(close(&s.r, &Matrix3::identity(), 1e-15));
        assert_eq!((s.i1, s.i2, s.i3), (3.0, 3.0, 1.0));
    }

    #[test]
    fn diagonal_stretch() {
        let s = svd_polar(&Matrix3::<f64>::from_diagonal(&Vector3::new(2.0, 1.0, 1.0)));
        assert!((s.i1 - 4.0).abs() < 1e-14);
        assert!((s.i2 - 6.0).abs() < 1e-14);
        assert!((s.i3 - 2.0).abs() < 1e-14);
        assert!(close(&s.r, &Matrix3::identity(), 1e-14));
    }

    #[test]
    fn pure_rotation() {
        let rot = *Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2).matrix();
        let s = svd_polar(&rot);
        assert!(close(&s.r, &rot, 1e-14));
        assert!(close(&s.s, &Matrix3::identity(), 1e-14));
        assert!((s.i1 - 3.0).abs() < 1e-14);
        assert!((s.i3 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reflection_folds_into_smallest_value() {
        let f = Matrix3::<f64>::from_diagonal(&Vector3::new(3.0, -0.5, 2.0));
        let s = svd_polar(&f);
        assert!((s.u.determinant() - 1.0).abs() < 1e-12);
        assert!((s.v.determinant() - 1.0).abs() < 1e-12);
        assert!((s.sigma[2] + 0.5).abs() < 1e-12);
        assert!((s.i1 - 4.5).abs() < 1e-12);
        assert!(close(&(s.r * s.s), &f, 1e-12));
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let f = Matrix3::from_fn(|_, _| rng.gen_range(-2.0..2.0));
            let s = svd_polar(&f);
            let rec = s.u * Matrix3::from_diagonal(&s.sigma) * s.v.transpose();
            assert!(close(&rec, &f, 1e-12));
            assert!(close(&(s.r * s.s), &f, 1e-12));
            assert!((s.r.determinant() - 1.0).abs() < 1e-12);
            assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= s.sigma[2].abs());
            assert!((s.i3 - s.sigma.product()).abs() < 1e-11);
            assert!((s.i2 - s.sigma.norm_squared()).abs() < 1e-11);
        }
    }

    #[test]
    fn gradients_at_identity() {
        let g = invariant_gradients(&svd_polar(&Matrix3::<f64>::identity()));
        assert!(close(&g.g1, &Matrix3::identity(), 1e-15));
        assert!(close(&g.g2, &(Matrix3::identity() * 2.0), 1e-15));
        assert!(close(&g.g3, &Matrix3::identity(), 1e-15));
    }

    #[test]
    fn cofactor_of_diagonal() {
        let f = Matrix3::from_diagonal(&Vector3::new(2.0, 1.0, 1.0));
        assert_eq!(cofactor(&f), Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 2.0)));
    }

    #[test]
    fn det_quadratic_matches_polynomial_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let f = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let w = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            // det(F + tW) is a cubic; recover its t² coefficient from 4 samples.
            let p = |t: f64| (f + w * t).determinant();
            let c2 = (p(1.0) + p(-1.0)) / 2.0 - p(0.0);
            assert!((det_hessian_quadratic(&f, &w) - 2.0 * c2).abs() < 1e-12);
        }
    }
}
