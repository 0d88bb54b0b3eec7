//! Linear prediction by the covariance method, forward-backward (FB)
//! variant, and the shared normal-equation solver.
//!
//! With A(z) = 1 + sum_k a_k z^-k over a frame x[0..N):
//!
//! * covariance: minimize the forward error
//!   sum_{n in [p,N)} (x[n] + sum_k a_k x[n-k])^2
//! * forward-backward: add the backward error
//!   sum_{n in [0,N-p)} (x[n] + sum_k a_k x[n+k])^2
//!
//! Both use only samples inside the frame; no window is applied. The
//! weighted FB form scales each squared error term by a per-sample weight
//! w[n], the same index n in both sums.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Frames with energy below this are treated as silent and skipped.
pub const DEGENERATE_ENERGY_EPS: f64 = 1e-12;

/// Condition-estimate limit beyond which the solver applies a ridge.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Ridge magnitude: lambda = RIDGE_SCALE * trace(matrix) / order.
pub const RIDGE_SCALE: f64 = 1e-9;

/// Symmetric normal equations `matrix * a = rhs` for one frame.
/// `matrix` is row-major with `order * order` entries; `matrix[(i-1) *
/// order + (k-1)]` pairs lag i with lag k.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSystem {
    pub order: usize,
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl NormalSystem {
    /// Entry pairing lags i and k, both 1-based as in the defining sums.
    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.matrix[(i - 1) * self.order + (k - 1)]
    }
}

/// Solver output: predictor coefficients a_1..a_p for A(z) = 1 + sum a_k z^-k.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSolution {
    pub coefficients: Vec<f64>,
    /// True when the system needed a ridge or could not be solved at all.
    pub degenerate: bool,
}

/// Fitted all-pole model for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub order: usize,
    /// a_1..a_p of A(z) = 1 + sum a_k z^-k.
    pub coefficients: Vec<f64>,
    /// Attained value of the minimized error at the solution.
    pub residual_energy: f64,
    /// Silent frame, ill-conditioned normal equations, or solver fallback.
    pub degenerate: bool,
}

impl LpModel {
    fn zero(order: usize) -> Self {
        LpModel {
            order,
            coefficients: vec![0.0; order],
            residual_energy: 0.0,
            degenerate: true,
        }
    }
}

fn check_frame(frame: &[f64], order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::invalid("order", "must be at least 1"));
    }
    if frame.len() <= 2 * order {
        return Err(Error::FrameTooShort {
            len: frame.len(),
            order,
            min: 2 * order,
        });
    }
    Ok(())
}

fn check_weights(weights: &[f64], frame_len: usize) -> Result<()> {
    if weights.len() != frame_len {
        return Err(Error::WeightLengthMismatch { got: weights.len(), expected: frame_len });
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::BadWeight { index: i, value: w });
        }
    }
    Ok(())
}

fn frame_energy(frame: &[f64]) -> f64 {
    frame.iter().map(|x| x * x).sum()
}

/// Forward-only covariance normal equations.
pub fn build_cov_system(frame: &[f64], order: usize) -> Result<NormalSystem> {
    check_frame(frame, order)?;
    let p = order;
    let n = frame.len();
    let mut matrix = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for i in 1..=p {
        for k in 1..=p {
            let mut acc = 0.0;
            for m in p..n {
                acc += frame[m - i] * frame[m - k];
            }
            matrix[(i - 1) * p + (k - 1)] = acc;
        }
        let mut acc = 0.0;
        for m in p..n {
            acc += frame[m - i] * frame[m];
        }
        rhs[i - 1] = -acc;
    }
    Ok(NormalSystem { order: p, matrix, rhs })
}

/// Forward-backward normal equations, optionally weighted per sample.
/// `weights` must cover the whole frame; absent weights mean all ones and
/// produce bit-identical results to an explicit all-ones vector.
pub fn build_fb_system(
    frame: &[f64],
    order: usize,
    weights: Option<&[f64]>,
) -> Result<NormalSystem> {
    check_frame(frame, order)?;
    if let Some(w) = weights {
        check_weights(w, frame.len())?;
    }
    let ones;
    let w = match weights {
        Some(w) => w,
        None => {
            ones = vec![1.0; frame.len()];
            &ones[..]
        }
    };

    let p = order;
    let n = frame.len();
    let mut matrix = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for i in 1..=p {
        for k in 1..=p {
            let mut acc = 0.0;
            for m in p..n {
                acc += w[m] * frame[m - i] * frame[m - k];
            }
            for m in 0..n - p {
                acc += w[m] * frame[m + i] * frame[m + k];
            }
            matrix[(i - 1) * p + (k - 1)] = acc;
        }
        let mut acc = 0.0;
        for m in p..n {
            acc += w[m] * frame[m - i] * frame[m];
        }
        for m in 0..n - p {
            acc += w[m] * frame[m + i] * frame[m];
        }
        rhs[i - 1] = -acc;
    }
    Ok(NormalSystem { order: p, matrix, rhs })
}

/// Solves the symmetric system. Never fails: an ill-conditioned or singular
/// matrix (condition estimate above [`CONDITION_LIMIT`], or a factorization
/// failure) gets a Tikhonov ridge and the degeneracy flag; if even that
/// cannot be solved the coefficients are zero and the flag is set.
pub fn solve_normal_system(system: &NormalSystem) -> NormalSolution {
    let p = system.order;
    let m = DMatrix::from_row_slice(p, p, &system.matrix);
    let r = DVector::from_column_slice(&system.rhs);

    let eigen = m.clone().symmetric_eigen().eigenvalues;
    let max_ev = eigen.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min_ev = eigen.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    let well_conditioned = max_ev.is_finite() && min_ev > 0.0 && max_ev / min_ev <= CONDITION_LIMIT;

    if well_conditioned {
        if let Some(a) = try_solve(&m, &r) {
            return NormalSolution { coefficients: a, degenerate: false };
        }
    }

    let trace: f64 = (0..p).map(|i| system.matrix[i * p + i]).sum();
    let lambda = RIDGE_SCALE * trace / p as f64;
    let mut ridged = m;
    for i in 0..p {
        ridged[(i, i)] += lambda;
    }
    match try_solve(&ridged, &r) {
        Some(a) => NormalSolution { coefficients: a, degenerate: true },
        None => NormalSolution { coefficients: vec![0.0; p], degenerate: true },
    }
}

fn try_solve(m: &DMatrix<f64>, r: &DVector<f64>) -> Option<Vec<f64>> {
    if let Some(chol) = m.clone().cholesky() {
        let a = chol.solve(r);
        if a.iter().all(|v| v.is_finite()) {
            return Some(a.as_slice().to_vec());
        }
    }
    let a = m.clone().lu().solve(r)?;
    a.iter().all(|v| v.is_finite()).then(|| a.as_slice().to_vec())
}

/// Attained forward (covariance) error of `coefficients` on the frame.
pub fn covariance_error(frame: &[f64], coefficients: &[f64]) -> f64 {
    let p = coefficients.len();
    let mut total = 0.0;
    for n in p..frame.len() {
        let mut e = frame[n];
        for (k, a) in coefficients.iter().enumerate() {
            e += a * frame[n - 1 - k];
        }
        total += e * e;
    }
    total
}

/// Attained forward-backward error, optionally weighted. Unit weights when
/// absent.
pub fn forward_backward_error(frame: &[f64], coefficients: &[f64], weights: Option<&[f64]>) -> f64 {
    let p = coefficients.len();
    let n = frame.len();
    let weight = |m: usize| weights.map_or(1.0, |w| w[m]);
    let mut total = 0.0;
    for m in p..n {
        let mut e = frame[m];
        for (k, a) in coefficients.iter().enumerate() {
            e += a * frame[m - 1 - k];
        }
        total += weight(m) * e * e;
    }
    for m in 0..n - p {
        let mut e = frame[m];
        for (k, a) in coefficients.iter().enumerate() {
            e += a * frame[m + 1 + k];
        }
        total += weight(m) * e * e;
    }
    total
}

/// Covariance-method linear prediction over one frame.
pub fn lp_cov(frame: &[f64], order: usize) -> Result<LpModel> {
    check_frame(frame, order)?;
    if frame_energy(frame) < DEGENERATE_ENERGY_EPS {
        return Ok(LpModel::zero(order));
    }
    let system = build_cov_system(frame, order)?;
    let sol = solve_normal_system(&system);
    let residual = covariance_error(frame, &sol.coefficients);
    Ok(LpModel {
        order,
        coefficients: sol.coefficients,
        residual_energy: residual,
        degenerate: sol.degenerate,
    })
}

/// Unweighted forward-backward linear prediction over one frame.
pub fn lp_fb(frame: &[f64], order: usize) -> Result<LpModel> {
    check_frame(frame, order)?;
    if frame_energy(frame) < DEGENERATE_ENERGY_EPS {
        return Ok(LpModel::zero(order));
    }
    let system = build_fb_system(frame, order, None)?;
    let sol = solve_normal_system(&system);
    let residual = forward_backward_error(frame, &sol.coefficients, None);
    Ok(LpModel {
        order,
        coefficients: sol.coefficients,
        residual_energy: residual,
        degenerate: sol.degenerate,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Brute-force FB normal equations straight from the defining sums.
    fn brute_fb(frame: &[f64], p: usize, w: Option<&[f64]>) -> (Vec<Vec<f64>>, Vec<f64>) {
        let n = frame.len();
        let wt = |m: usize| w.map_or(1.0, |w| w[m]);
        let mut matrix = vec![vec![0.0; p + 1]; p + 1];
        let mut rhs = vec![0.0; p + 1];
        for i in 1..=p {
            for k in 1..=p {
                let fwd: f64 = (p..n).map(|m| wt(m) * frame[m - i] * frame[m - k]).sum();
                let bwd: f64 = (0..n - p).map(|m| wt(m) * frame[m + i] * frame[m + k]).sum();
                matrix[i][k] = fwd + bwd;
            }
            let fwd: f64 = (p..n).map(|m| wt(m) * frame[m - i] * frame[m]).sum();
            let bwd: f64 = (0..n - p).map(|m| wt(m) * frame[m + i] * frame[m]).sum();
            rhs[i] = -(fwd + bwd);
        }
        (matrix, rhs)
    }

    fn ar2_frame(a1: f64, a2: f64, x0: f64, x1: f64, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        x[0] = x0;
        x[1] = x1;
        for i in 2..n {
            x[i] = -a1 * x[i - 1] - a2 * x[i - 2];
        }
        x
    }

    #[test]
    fn fb_system_hand_example_order_one() {
        let frame = [1.0, 2.0, 3.0, 4.0, 5.0];
        let sys = build_fb_system(&frame, 1, None).unwrap();
        // forward: 1+4+9+16, backward: 4+9+16+25
        assert_eq!(sys.entry(1, 1), 84.0);
        // forward: 1*2+2*3+3*4+4*5, backward: 2*1+3*2+4*3+5*4
        assert_eq!(sys.rhs[0], -80.0);
    }

    #[test]
    fn fb_system_matches_brute_force_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = rng.random_range(1..=3);
            let n = rng.random_range(2 * p + 1..=12);
            let frame: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            for w in [None, Some(&weights[..])] {
                let sys = build_fb_system(&frame, p, w).unwrap();
                let (bm, br) = brute_fb(&frame, p, w);
                for i in 1..=p {
                    for k in 1..=p {
                        let got = sys.entry(i, k);
                        let want = bm[i][k];
                        assert!(
                            (got - want).abs() <= 1e-12 * want.abs().max(1.0),
                            "entry ({i},{k}): {got} vs {want}"
                        );
                    }
                    assert!((sys.rhs[i - 1] - br[i]).abs() <= 1e-12 * br[i].abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn fb_system_absent_weights_equal_explicit_ones_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frame: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ones = vec![1.0; frame.len()];
        let a = build_fb_system(&frame, 13, None).unwrap();
        let b = build_fb_system(&frame, 13, Some(&ones)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fb_partial_sums_coincide_on_palindromic_frames() {
        let frame = [0.3, -1.2, 0.7, 2.0, 0.7, -1.2, 0.3];
        let p = 2;
        let n = frame.len();
        for i in 1..=p {
            for k in 1..=p {
                let fwd: f64 = (p..n).map(|m| frame[m - i] * frame[m - k]).sum();
                let bwd: f64 = (0..n - p).map(|m| frame[m + i] * frame[m + k]).sum();
                assert!((fwd - bwd).abs() < 1e-12, "({i},{k}): {fwd} vs {bwd}");
            }
        }
        // As a consequence the FB matrix is twice the covariance matrix.
        let fb = build_fb_system(&frame, p, None).unwrap();
        let cov = build_cov_system(&frame, p).unwrap();
        for i in 1..=p {
            for k in 1..=p {
                assert!((fb.entry(i, k) - 2.0 * cov.entry(i, k)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fb_system_of_time_reversed_frame_is_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame: Vec<f64> = (0..80).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut rev = frame.clone();
        rev.reverse();
        let a = build_fb_system(&frame, 4, None).unwrap();
        let b = build_fb_system(&rev, 4, None).unwrap();
        for i in 1..=4 {
            for k in 1..=4 {
                let (x, y) = (a.entry(i, k), b.entry(i, k));
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "({i},{k}): {x} vs {y}");
            }
            let (x, y) = (a.rhs[i - 1], b.rhs[i - 1]);
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn normal_matrix_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let frame: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        for sys in [
            build_cov_system(&frame, 13).unwrap(),
            build_fb_system(&frame, 13, None).unwrap(),
        ] {
            for i in 1..=13 {
                for k in 1..=13 {
                    assert_eq!(sys.entry(i, k), sys.entry(k, i));
                }
            }
        }
    }

    #[test]
    fn rejects_short_frames_and_zero_order() {
        let frame = vec![1.0; 10];
        assert!(matches!(
            lp_cov(&frame, 5),
            Err(Error::FrameTooShort { len: 10, order: 5, .. })
        ));
        assert!(build_fb_system(&frame, 0, None).is_err());
        let w = vec![1.0; 9];
        assert!(matches!(
            build_fb_system(&frame, 2, Some(&w)),
            Err(Error::WeightLengthMismatch { .. })
        ));
        let neg = vec![-1.0; 10];
        assert!(matches!(
            build_fb_system(&frame, 2, Some(&neg)),
            Err(Error::BadWeight { .. })
        ));
    }

    #[test]
    fn cov_recovers_exact_ar2_coefficients() {
        // Poles at 0.95 e^{+-j 0.7}: a1 = -2 r cos, a2 = r^2.
        let a1 = -2.0 * 0.95 * 0.7f64.cos();
        let a2 = 0.95f64 * 0.95;
        let frame = ar2_frame(a1, a2, 1.0, 0.4, 120);
        let model = lp_cov(&frame, 2).unwrap();
        assert!(!model.degenerate);
        assert!((model.coefficients[0] - a1).abs() < 1e-6, "{}", model.coefficients[0]);
        assert!((model.coefficients[1] - a2).abs() < 1e-6);
        assert!(model.residual_energy < 1e-10, "residual {}", model.residual_energy);
    }

    #[test]
    fn fb_recovers_exact_ar2_coefficients() {
        // A decaying transient satisfies the backward recursion with
        // coefficients (a1/a2, 1/a2), so exact two-sided recovery needs the
        // poles essentially on the unit circle.
        let r = 1.0 - 1e-7;
        let a1 = -2.0 * r * 1.1f64.cos();
        let a2 = r * r;
        let frame = ar2_frame(a1, a2, 0.8, -0.3, 150);
        let model = lp_fb(&frame, 2).unwrap();
        assert!((model.coefficients[0] - a1).abs() < 1e-5, "{}", model.coefficients[0]);
        assert!((model.coefficients[1] - a2).abs() < 1e-5, "{}", model.coefficients[1]);
    }

    #[test]
    fn silent_frame_yields_zero_model_with_flag() {
        let frame = vec![0.0; 100];
        for model in [lp_cov(&frame, 13).unwrap(), lp_fb(&frame, 13).unwrap()] {
            assert!(model.degenerate);
            assert_eq!(model.coefficients, vec![0.0; 13]);
            assert_eq!(model.residual_energy, 0.0);
        }
    }

    #[test]
    fn solver_identity_and_diagonal_cases() {
        let ident = NormalSystem {
            order: 2,
            matrix: vec![1.0, 0.0, 0.0, 1.0],
            rhs: vec![3.0, -4.0],
        };
        let s = solve_normal_system(&ident);
        assert!(!s.degenerate);
        assert_eq!(s.coefficients, vec![3.0, -4.0]);

        let diag = NormalSystem {
            order: 2,
            matrix: vec![2.0, 0.0, 0.0, 4.0],
            rhs: vec![2.0, 8.0],
        };
        let s = solve_normal_system(&diag);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((s.coefficients[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn solver_residual_small_on_random_spd_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let p = 13;
            let g: Vec<f64> = (0..p * p).map(|_| rng.random_range(-1.0..1.0)).collect();
            // M = G^T G is symmetric positive definite (a.s.).
            let mut matrix = vec![0.0; p * p];
            for i in 0..p {
                for k in 0..p {
                    matrix[i * p + k] = (0..p).map(|j| g[j * p + i] * g[j * p + k]).sum();
                }
            }
            let rhs: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sys = NormalSystem { order: p, matrix, rhs };
            let sol = solve_normal_system(&sys);
            for i in 0..p {
                let mut r = -sys.rhs[i];
                for k in 0..p {
                    r += sys.matrix[i * p + k] * sol.coefficients[k];
                }
                assert!(r.abs() < 1e-8, "residual {r} at row {i}");
            }
        }
    }

    #[test]
    fn solver_flags_singular_systems_without_failing() {
        let sys = NormalSystem {
            order: 2,
            matrix: vec![1.0, 1.0, 1.0, 1.0],
            rhs: vec![1.0, 1.0],
        };
        let s = solve_normal_system(&sys);
        assert!(s.degenerate);
        assert!(s.coefficients.iter().all(|v| v.is_finite()));

        let zero = NormalSystem { order: 2, matrix: vec![0.0; 4], rhs: vec![0.0; 2] };
        let s = solve_normal_system(&zero);
        assert!(s.degenerate);
    }

    #[test]
    fn cov_solution_is_optimal_against_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let frame: Vec<f64> = (0..240).map(|_| rng.random_range(-1.0..1.0)).collect();
        let model = lp_cov(&frame, 13).unwrap();
        let base = covariance_error(&frame, &model.coefficients);
        for _ in 0..100 {
            let scale = 10f64.powf(rng.random_range(-3.0..-1.0));
            let perturbed: Vec<f64> = model
                .coefficients
                .iter()
                .map(|a| a + scale * rng.random_range(-1.0..1.0))
                .collect();
            let e = covariance_error(&frame, &perturbed);
            assert!(e >= base * (1.0 - 1e-9), "perturbed {e} < optimal {base}");
        }
    }

    #[test]
    fn fb_solution_error_not_above_cov_solution_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let frame: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cov = lp_cov(&frame, 13).unwrap();
            let fb = lp_fb(&frame, 13).unwrap();
            let at_fb = forward_backward_error(&frame, &fb.coefficients, None);
            let at_cov = forward_backward_error(&frame, &cov.coefficients, None);
            assert!(at_fb <= at_cov * (1.0 + 1e-9), "{at_fb} > {at_cov}");
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            // Scaling the frame by s scales every entry by s^2 and leaves the
            // solution unchanged (up to roundoff).
            #[test]
            fn scaling_frame_scales_system_quadratically(
                seed in 0u64..1000,
                s in 0.25f64..4.0,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let frame: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
                let scaled: Vec<f64> = frame.iter().map(|x| s * x).collect();
                let p = 6;
                let a = build_fb_system(&frame, p, None).unwrap();
                let b = build_fb_system(&scaled, p, None).unwrap();
                let s2 = s * s;
                for i in 1..=p {
                    for k in 1..=p {
                        let want = s2 * a.entry(i, k);
                        let got = b.entry(i, k);
                        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-30));
                    }
                }
                let ca = solve_normal_system(&a).coefficients;
                let cb = solve_normal_system(&b).coefficients;
                for (x, y) in ca.iter().zip(&cb) {
                    prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
                }
            }
        }
    }
}
