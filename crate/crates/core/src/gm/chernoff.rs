//! Chernoff (weighted geometric mean) fusion of Gaussians and Gaussian mixtures.
//!
//! Pairwise mixture fusion raises each mixture to its exponent term by term,
//! `(Σⱼ αⱼ Nⱼ)^ω ≈ Σⱼ αⱼ^ω Nⱼ^ω`, which is accurate when components are well
//! separated. Each pair of components then fuses by covariance intersection,
//! and the pair weight picks up the closed-form mass of `Nₐ^ω N_b^{1-ω}`.

use nalgebra::{DMatrix, DVector};

use super::{Component, Gaussian, GaussianMixture, GmError, Reduction};
use crate::linalg::{self, log_sum_exp};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

fn check_exponent(omega: f64) -> Result<(), GmError> {
    if !(0.0..=1.0).contains(&omega) || omega.is_nan() {
        return Err(GmError::InvalidExponent(omega));
    }
    Ok(())
}

fn not_pd() -> GmError {
    GmError::NotPositiveDefinite {
        min_eig: f64::NAN,
        max_eig: f64::NAN,
    }
}

/// Covariance intersection of two Gaussians: the information pair of the result
/// is `ω (Φₐ, qₐ) + (1-ω) (Φ_b, q_b)`.
pub fn gaussian_ci(a: &Gaussian, b: &Gaussian, omega: f64) -> Result<Gaussian, GmError> {
    check_exponent(omega)?;
    if a.dim() != b.dim() {
        return Err(GmError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if omega == 1.0 {
        return Ok(a.clone());
    }
    if omega == 0.0 {
        return Ok(b.clone());
    }
    let ia = a.information_pair()?;
    let ib = b.information_pair()?;
    let info = &ia.info_matrix * omega + &ib.info_matrix * (1.0 - omega);
    let vec = &ia.info_vector * omega + &ib.info_vector * (1.0 - omega);
    let chol = linalg::cholesky(&linalg::symmetrize(&info)).ok_or_else(not_pd)?;
    Gaussian::from_parts(chol.solve(&vec), chol.inverse())
}

/// `log β(ω, P) = ½ log det(2πP/ω) − (ω/2) log det(2πP)`, the mass of `N(·;μ,P)^ω`
/// relative to `N(·;μ,P/ω)`.
pub fn log_beta(omega: f64, cov: &DMatrix<f64>) -> Result<f64, GmError> {
    if omega <= 0.0 || omega > 1.0 || omega.is_nan() {
        return Err(GmError::DegenerateExponent(omega));
    }
    let chol = linalg::cholesky(cov).ok_or_else(not_pd)?;
    Ok(log_beta_from_logdet(omega, linalg::log_det_chol(&chol), cov.nrows()))
}

fn log_beta_from_logdet(omega: f64, log_det: f64, dim: usize) -> f64 {
    let d = dim as f64;
    0.5 * (d * (LN_2PI - omega.ln()) + log_det) - 0.5 * omega * (d * LN_2PI + log_det)
}

/// Log of the fused pair weight `ᾱ` for components `(αₐ, a)` and `(α_b, b)`,
/// including the separation factor `N(μₐ−μ_b; 0, Pₐ/ω + P_b/(1−ω))`.
///
/// `omega` must lie strictly inside `(0, 1)`; the endpoints have no
/// complementary factor and callers short-circuit them.
pub fn chernoff_weight(
    a: &Gaussian,
    b: &Gaussian,
    log_alpha_a: f64,
    log_alpha_b: f64,
    omega: f64,
) -> Result<f64, GmError> {
    if omega <= 0.0 || omega >= 1.0 || omega.is_nan() {
        return Err(GmError::DegenerateExponent(omega));
    }
    let sep_cov = a.covariance() / omega + b.covariance() / (1.0 - omega);
    let residual = a.mean() - b.mean();
    let sep = linalg::log_normal_zero_mean(&residual, &sep_cov).ok_or_else(not_pd)?;
    Ok(omega * log_alpha_a
        + (1.0 - omega) * log_alpha_b
        + log_beta(omega, a.covariance())?
        + log_beta(1.0 - omega, b.covariance())?
        + sep)
}

/// Fused components lighter than this fraction of the truncation threshold
/// (relative to the heaviest) are not built when a reduction follows.
const SKIP_FACTOR: f64 = 1e-3;

struct Prepared<'a> {
    log_alpha: f64,
    g: &'a Gaussian,
    info: DMatrix<f64>,
    info_vec: DVector<f64>,
    log_det: f64,
}

fn prepare(gm: &GaussianMixture) -> Result<Vec<Prepared<'_>>, GmError> {
    let lm = gm.log_mass();
    gm.iter()
        .map(|c| {
            let chol = linalg::cholesky(c.gaussian.covariance()).ok_or_else(not_pd)?;
            let info = chol.inverse();
            let info_vec = &info * c.gaussian.mean();
            Ok(Prepared {
                log_alpha: c.log_weight - lm,
                g: &c.gaussian,
                log_det: linalg::log_det_chol(&chol),
                info,
                info_vec,
            })
        })
        .collect()
}

/// Pairwise Chernoff fusion `p_a^ω p_b^{1-ω} / ∫·` of two mixtures.
///
/// Returns the normalized `Nₐ·N_b`-component mixture and the log of its
/// pre-normalization mass `log ΣΣ ᾱⱼₖ`, which approximates
/// `log ∫ p_a^ω p_b^{1-ω} dx`. `ω ∈ {0, 1}` returns the corresponding input.
pub fn gm_chernoff_pair(
    p_a: &GaussianMixture,
    p_b: &GaussianMixture,
    omega: f64,
) -> Result<(GaussianMixture, f64), GmError> {
    chernoff_pair(p_a, p_b, omega, None)
}

/// Pairwise fusion that, given `skip`, builds no component whose weight is
/// below `skip` times the heaviest; the returned mass still counts them.
fn chernoff_pair(
    p_a: &GaussianMixture,
    p_b: &GaussianMixture,
    omega: f64,
    skip: Option<f64>,
) -> Result<(GaussianMixture, f64), GmError> {
    check_exponent(omega)?;
    if p_a.is_empty() || p_b.is_empty() {
        return Err(GmError::EmptyMixture);
    }
    if p_a.dim() != p_b.dim() {
        return Err(GmError::DimensionMismatch {
            expected: p_a.dim().unwrap_or(0),
            found: p_b.dim().unwrap_or(0),
        });
    }
    if omega == 1.0 {
        return Ok((p_a.clone().normalized(), p_a.log_mass()));
    }
    if omega == 0.0 {
        return Ok((p_b.clone().normalized(), p_b.log_mass()));
    }
    let dim = p_a.dim().unwrap_or(0);
    let a = prepare(p_a)?;
    let b = prepare(p_b)?;
    let mut weights = Vec::with_capacity(a.len() * b.len());
    for ca in &a {
        let lb_a = log_beta_from_logdet(omega, ca.log_det, dim);
        for cb in &b {
            let sep_cov = ca.g.covariance() / omega + cb.g.covariance() / (1.0 - omega);
            let residual = ca.g.mean() - cb.g.mean();
            let sep = linalg::log_normal_zero_mean(&residual, &sep_cov).ok_or_else(not_pd)?;
            weights.push(
                omega * ca.log_alpha
                    + (1.0 - omega) * cb.log_alpha
                    + lb_a
                    + log_beta_from_logdet(1.0 - omega, cb.log_det, dim)
                    + sep,
            );
        }
    }
    let log_norm = log_sum_exp(weights.iter().copied());
    if !log_norm.is_finite() {
        return Err(GmError::EmptyFusion);
    }
    let floor = match skip {
        Some(f) => weights.iter().copied().fold(f64::NEG_INFINITY, f64::max) + f.ln(),
        None => f64::NEG_INFINITY,
    };
    let mut comps = Vec::with_capacity(weights.len());
    for (idx, &log_w) in weights.iter().enumerate() {
        if log_w == f64::NEG_INFINITY || log_w < floor {
            continue;
        }
        let (ca, cb) = (&a[idx / b.len()], &b[idx % b.len()]);
        let info = &ca.info * omega + &cb.info * (1.0 - omega);
        let vec = &ca.info_vec * omega + &cb.info_vec * (1.0 - omega);
        let chol = linalg::cholesky(&linalg::symmetrize(&info)).ok_or_else(not_pd)?;
        comps.push(Component {
            log_weight: log_w - log_norm,
            gaussian: Gaussian::from_parts(chol.solve(&vec), chol.inverse())?,
        });
    }
    Ok((GaussianMixture::from_components_unchecked(comps), log_norm))
}

/// Multi-input Chernoff fusion `∏ pᵢ^{ωᵢ} / ∫·` by a left fold of pairwise
/// fusions with renormalized exponents.
///
/// Zero-weight inputs are skipped. When `reduction` is set, each operand and
/// each intermediate result is merged, truncated and capped with it.
/// Returns the fused mixture and `log ∫ ∏ pᵢ^{ωᵢ} dx` as approximated by the
/// pairwise rule.
pub fn gm_chernoff_multi(
    inputs: &[(&GaussianMixture, f64)],
    reduction: Option<Reduction>,
) -> Result<(GaussianMixture, f64), GmError> {
    if inputs.iter().any(|(_, w)| !(*w >= 0.0) || !w.is_finite()) {
        let bad = inputs
            .iter()
            .map(|(_, w)| *w)
            .find(|w| !(*w >= 0.0) || !w.is_finite())
            .unwrap_or(f64::NAN);
        return Err(GmError::InvalidWeight(bad));
    }
    let active: Vec<(&GaussianMixture, f64)> =
        inputs.iter().filter(|(_, w)| *w > 0.0).cloned().collect();
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    if active.is_empty() || total <= 0.0 {
        return Err(GmError::InvalidWeight(0.0));
    }
    if active.len() == 1 {
        let p = active[0].0;
        if p.is_empty() {
            return Err(GmError::EmptyMixture);
        }
        return Ok((p.clone(), 0.0));
    }
    let reduced: Vec<(GaussianMixture, f64)> = active.iter().map(|(p, w)| (reduce_operand(p, reduction), *w)).collect();
    let refs: Vec<(&GaussianMixture, f64)> = reduced.iter().map(|(p, w)| (p, *w)).collect();
    chernoff_fold(&refs, reduction)
}

/// Operand reduction used by [`gm_chernoff_multi`]; single components pass through.
pub(crate) fn reduce_operand(p: &GaussianMixture, reduction: Option<Reduction>) -> GaussianMixture {
    match reduction {
        Some(r) if p.len() > 1 => r.apply(p),
        _ => p.clone(),
    }
}

/// Left fold of [`gm_chernoff_multi`] over positively weighted, already reduced operands.
pub(crate) fn chernoff_fold(
    active: &[(&GaussianMixture, f64)],
    reduction: Option<Reduction>,
) -> Result<(GaussianMixture, f64), GmError> {
    let total: f64 = active.iter().map(|(_, w)| w).sum();
    let mut acc = active[0].0.clone();
    let mut acc_weight = active[0].1 / total;
    let mut log_eta = 0.0;
    let skip = reduction.map(|r| r.truncation_threshold * SKIP_FACTOR);
    for (p, w) in active.iter().skip(1) {
        let w = w / total;
        let omega = acc_weight / (acc_weight + w);
        let (fused, ln) = chernoff_pair(&acc, p, omega, skip)?;
        log_eta = omega * log_eta + ln;
        acc = match reduction {
            Some(r) => r.apply(&fused),
            None => fused,
        };
        acc_weight += w;
    }
    Ok((acc, log_eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn s(m: f64, v: f64) -> Gaussian {
        Gaussian::scalar(m, v).unwrap()
    }

    #[test]
    fn ci_of_identical_inputs_is_fixed_point() {
        let g = Gaussian::from_diagonal(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        let out = gaussian_ci(&g, &g, 0.5).unwrap();
        assert!((out.mean() - g.mean()).norm() < 1e-12);
        assert!((out.covariance() - g.covariance()).norm() < 1e-12);
    }

    #[test]
    fn ci_scalar_oracle() {
        // Information arithmetic: Φ = 0.5·1 + 0.5·1 = 1, q = 0.5·0 + 0.5·2 = 1.
        let out = gaussian_ci(&s(0.0, 1.0), &s(2.0, 1.0), 0.5).unwrap();
        assert!((out.mean()[0] - 1.0).abs() < 1e-12);
        assert!((out.covariance()[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ci_with_unit_exponent_returns_first() {
        let a = s(3.0, 2.0);
        let b = s(-1.0, 5.0);
        assert_eq!(gaussian_ci(&a, &b, 1.0).unwrap(), a);
        assert_eq!(gaussian_ci(&a, &b, 0.0).unwrap(), b);
        assert!(gaussian_ci(&a, &b, 1.5).is_err());
    }

    #[test]
    fn chernoff_weight_identical_scalar() {
        // log[β(0.5,1)² · N(0;0,4)] evaluated from the scalar determinants.
        let beta = (2.0 * PI * 2.0).sqrt() / (2.0 * PI).powf(0.25);
        let expected = (beta * beta * (1.0 / (2.0 * PI * 4.0).sqrt())).ln();
        let got = chernoff_weight(&s(0.0, 1.0), &s(0.0, 1.0), 0.0, 0.0, 0.5).unwrap();
        assert!((got - expected).abs() < 1e-12);
        // Identical normalized Gaussians have unit geometric-mean mass.
        assert!(got.abs() < 1e-12);
    }

    #[test]
    fn beta_is_one_at_unit_exponent() {
        let p = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        assert!(log_beta(1.0, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn chernoff_weight_rejects_endpoints() {
        let g = s(0.0, 1.0);
        assert!(matches!(
            chernoff_weight(&g, &g, 0.0, 0.0, 0.0),
            Err(GmError::DegenerateExponent(_))
        ));
        assert!(chernoff_weight(&g, &g, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn chernoff_weight_decreases_with_separation() {
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let w = chernoff_weight(&s(0.0, 1.0), &s(k as f64, 1.0), 0.0, 0.0, 0.3).unwrap();
            assert!(w < prev);
            prev = w;
        }
        assert!(prev < -20.0);
    }

    #[test]
    fn pair_single_components_matches_ci() {
        let a = s(1.0, 2.0);
        let b = s(4.0, 0.5);
        let (gm, _) = gm_chernoff_pair(&GaussianMixture::single(a.clone()), &GaussianMixture::single(b.clone()), 0.3).unwrap();
        let ci = gaussian_ci(&a, &b, 0.3).unwrap();
        assert_eq!(gm.len(), 1);
        assert!((gm.components()[0].gaussian.mean() - ci.mean()).norm() < 1e-12);
        assert!((gm.components()[0].gaussian.covariance() - ci.covariance()).norm() < 1e-12);
    }

    #[test]
    fn multi_single_input_is_identity() {
        let p = GaussianMixture::from_weights(vec![(0.3, s(0.0, 1.0)), (0.7, s(5.0, 2.0))]).unwrap();
        let (out, ln) = gm_chernoff_multi(&[(&p, 1.0)], Some(Reduction { merge_threshold: 4.0, truncation_threshold: 0.0, max_components: usize::MAX })).unwrap();
        assert_eq!(out, p);
        assert_eq!(ln, 0.0);
    }

    #[test]
    fn multi_skips_zero_weight() {
        let p = GaussianMixture::single(s(0.0, 1.0));
        let q = GaussianMixture::single(s(9.0, 1.0));
        let (out, ln) = gm_chernoff_multi(&[(&p, 1.0), (&q, 0.0)], None).unwrap();
        assert_eq!(out, p);
        assert_eq!(ln, 0.0);
    }

    #[test]
    fn multi_identical_is_fixed_point() {
        let g = Gaussian::from_diagonal(&[1.0, 2.0, 3.0, 4.0], &[1e6, 1e4, 1e6, 1e4]).unwrap();
        let p = GaussianMixture::single(g.clone());
        let w = 1.0 / 3.0;
        let (out, ln) = gm_chernoff_multi(&[(&p, w), (&p, w), (&p, w)], None).unwrap();
        let c = &out.components()[0].gaussian;
        assert!((c.mean() - g.mean()).norm() < 1e-8);
        assert!((c.covariance() - g.covariance()).norm() / 1e6 < 1e-10);
        assert!(ln.abs() < 1e-9);
    }
}
