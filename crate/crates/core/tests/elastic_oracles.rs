//! Element kernels against finite differences and dense assembly.

mod common;

use common::checks::{fast_path_errors, gradient_fd_error, material, SAMPLES};
use common::{deformation_gradient, deformed_tet, rng};
use pncg_core::elasticity::EnergyModel;
use pncg_core::oracle::dense_element_hessian;

#[test]
fn gradients_match_central_differences_1000_samples_seed_101() {
    for model in EnergyModel::ALL {
        let e = gradient_fd_error(model, 101, SAMPLES);
        assert!(e <= 1e-5, "{model:?}: {e:e}");
    }
}

#[test]
fn diagonal_and_quadratic_form_match_dense_1000_samples_seed_202() {
    for model in EnergyModel::ALL {
        let (d, q) = fast_path_errors(model, 202, SAMPLES);
        assert!(d <= 1e-10, "{model:?} diagonal: {d:e}");
        assert!(q <= 1e-10, "{model:?} quadratic form: {q:e}");
    }
}

#[test]
fn dense_element_hessian_is_symmetric_seed_303() {
    let mut r = rng(303);
    for model in EnergyModel::ALL {
        let m = material(model);
        for _ in 0..100 {
            let f = deformation_gradient(&mut r, 10.0);
            let (mesh, x) = deformed_tet(&mut r, &f);
            let h = dense_element_hessian(&mesh, &x, 0, &m).unwrap();
            assert!(h.asymmetry() <= 1e-9 * h.0.norm(), "{model:?}");
        }
    }
}

#[test]
fn gradient_fd_error_is_reported_per_model() {
    // Small smoke run so a failing model is named in the output.
    for model in EnergyModel::ALL {
        let e = gradient_fd_error(model, 7, 20);
        println!("{model:?}: {e:e}");
        assert!(e.is_finite());
    }
}
