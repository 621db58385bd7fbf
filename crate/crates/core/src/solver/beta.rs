//! Conjugate-direction coefficients.

use super::config::BetaVariant;
use super::reduce;
use crate::real::Real;
use nalgebra::Vector3;

/// Every dot product any `β` variant needs, gathered in one pass.
///
/// `g` is the previous gradient, `g₊` the new one, `p` the previous
/// direction, `y = g₊ − g` and `P` the (new) preconditioner diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaDots<T> {
    pub gn_p_y: T,
    pub y_p_y: T,
    pub y_dot_p: T,
    pub p_dot_gn: T,
    pub gn_p_gn: T,
    pub g_p_g: T,
    pub y_dot_y: T,
    pub p_dot_p: T,
}

/// Degeneracy threshold on `|yᵀp| / (‖y‖‖p‖)`.
pub const RESTART_THRESHOLD: f64 = 1e-30;

impl<T: Real> BetaDots<T> {
    /// Per-vertex contribution.
    #[inline]
    pub fn term(g_next: &Vector3<T>, g: &Vector3<T>, p: &Vector3<T>, pd: &Vector3<T>) -> [T; 8] {
        let y = g_next - g;
        let py = pd.component_mul(&y);
        let pgn = pd.component_mul(g_next);
        [
            g_next.dot(&py),
            y.dot(&py),
            y.dot(p),
            p.dot(g_next),
            g_next.dot(&pgn),
            g.dot(&pd.component_mul(g)),
            y.norm_squared(),
            p.norm_squared(),
        ]
    }

    pub fn from_array(a: [T; 8]) -> Self {
        BetaDots {
            gn_p_y: a[0],
            y_p_y: a[1],
            y_dot_p: a[2],
            p_dot_gn: a[3],
            gn_p_gn: a[4],
            g_p_g: a[5],
            y_dot_y: a[6],
            p_dot_p: a[7],
        }
    }

    pub fn compute(
        g_next: &[Vector3<T>],
        g: &[Vector3<T>],
        p: &[Vector3<T>],
        p_diag: &[Vector3<T>],
        deterministic: bool,
    ) -> Self {
        Self::from_array(reduce::sum_k(g_next.len(), deterministic, |i| {
            Self::term(&g_next[i], &g[i], &p[i], &p_diag[i])
        }))
    }

    /// `β` for `variant`, or zero when the formula is degenerate: a
    /// vanishing denominator (`|yᵀp|` below `1e-30‖y‖‖p‖` for Dai–Kou,
    /// `gᵀPg = 0` for the baselines) or a non-finite result.
    pub fn beta(&self, variant: BetaVariant) -> T {
        let z = T::zero();
        if self.gn_p_gn == z {
            return z;
        }
        let b = match variant {
            BetaVariant::Dk => {
                let ytp = self.y_dot_p;
                let scale = (self.y_dot_y * self.p_dot_p).sqrt();
                if ytp == z || !(ytp.abs() >= T::of(RESTART_THRESHOLD) * scale) {
                    return z;
                }
                self.gn_p_y / ytp - (self.y_p_y / ytp) * (self.p_dot_gn / ytp)
            }
            BetaVariant::Fr | BetaVariant::Prp if self.g_p_g == z => return z,
            BetaVariant::Fr => self.gn_p_gn / self.g_p_g,
            BetaVariant::Prp => (self.gn_p_y / self.g_p_g).max(z),
        };
        if b.is_finite_val() {
            b
        } else {
            z
        }
    }
}

/// Preconditioned Dai–Kou `β`.
pub fn beta_dk<T: Real>(g_next: &[Vector3<T>], g: &[Vector3<T>], p: &[Vector3<T>], p_diag: &[Vector3<T>]) -> T {
    BetaDots::compute(g_next, g, p, p_diag, true).beta(BetaVariant::Dk)
}

/// `β` for any variant, including the Fletcher–Reeves and Polak–Ribière baselines.
pub fn beta_baseline<T: Real>(
    variant: BetaVariant,
    g_next: &[Vector3<T>],
    g: &[Vector3<T>],
    p: &[Vector3<T>],
    p_diag: &[Vector3<T>],
) -> T {
    BetaDots::compute(g_next, g, p, p_diag, true).beta(variant)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64) -> Vec<Vector3<f64>> {
        vec![Vector3::new(x, y, 0.0)]
    }

    #[test]
    fn dk_hand_case() {
        let ones = vec![Vector3::repeat(1.0)];
        let p = v(1.0, 0.0);
        let b = beta_dk(&v(0.0, 1.0), &v(-1.0, 0.0), &p, &ones);
        assert_eq!(b, 1.0);
        // p_next = −P g₊ + β p = (1, −1)
        let next = -v(0.0, 1.0)[0] + p[0] * b;
        assert_eq!(next, Vector3::new(1.0, -1.0, 0.0));
    }

    #[test]
    fn degenerate_cases_restart() {
        let ones = vec![Vector3::repeat(1.0)];
        assert_eq!(beta_dk(&v(0.0, 0.0), &v(-1.0, 0.0), &v(1.0, 0.0), &ones), 0.0);
        assert_eq!(beta_dk(&v(2.0, 1.0), &v(2.0, 1.0), &v(1.0, 0.0), &ones), 0.0);
        assert_eq!(beta_dk(&v(0.0, 1.0), &v(0.0, 0.0), &v(1.0, 0.0), &ones), 0.0);
    }

    #[test]
    fn baselines() {
        let ones = vec![Vector3::repeat(1.0)];
        let g = v(1.0, 0.0);
        let p = v(-1.0, 0.5);
        assert_eq!(beta_baseline(BetaVariant::Fr, &g, &g, &p, &ones), 1.0);
        assert_eq!(beta_baseline(BetaVariant::Prp, &g, &g, &p, &ones), 0.0);
        assert_eq!(beta_baseline(BetaVariant::Fr, &v(0.0, 2.0), &g, &p, &ones), 4.0);
        assert_eq!(beta_baseline(BetaVariant::Prp, &v(0.0, 2.0), &v(0.0, 4.0), &p, &ones), 0.0);
        // Dai–Kou has no such fallback: y = 0 is a restart.
        assert_eq!(beta_dk(&g, &g, &p, &ones), 0.0);
    }
}
