use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mc::{estimate_many, EstimateReport, McConfig};
use crate::poly::PolyFunctional;

use super::matrix::{determinant, malliavin_matrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyConfig {
    /// Levels `ε` for `P(det Γ ≤ ε)`.
    pub epsilons: Vec<f64>,
    /// Exponents `p` for `E[(det Γ)^{-p}]`.
    pub powers: Vec<f64>,
    /// `det Γ` at or below this counts as zero.
    pub zero_tol: f64,
    /// Upper confidence bound on `P(det Γ = 0)` below which the
    /// absolute-continuity criterion is reported as plausible.
    pub threshold: f64,
}

impl Default for NondegeneracyConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 1e-4],
            powers: vec![1.0, 2.0],
            zero_tol: 1e-12,
            threshold: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub prob_zero: EstimateReport,
    pub prob_below: Vec<(f64, EstimateReport)>,
    /// Estimated over samples with `det Γ > zero_tol`; `n_rejected` counts the rest.
    pub inverse_moments: Vec<(f64, Option<EstimateReport>)>,
    pub criterion_plausible: bool,
}

/// Monte Carlo diagnostics of `det Γ` for the Malliavin matrix of `fs`.
pub fn nondegeneracy_report(
    fs: &[PolyFunctional<f64>],
    cfg: &McConfig,
    nd: &NondegeneracyConfig,
) -> Result<NondegeneracyReport> {
    let gamma = malliavin_matrix(fs)?;
    let d = fs[0].dim();
    let n_eps = nd.epsilons.len();
    let det_at = |x: &[f64]| determinant(gamma.eval(x));

    let probs = estimate_many(d, 1 + n_eps, cfg, |x, out| {
        let det = det_at(x);
        out[0] = if det <= nd.zero_tol { 1.0 } else { 0.0 };
        for (o, &eps) in out[1..].iter_mut().zip(&nd.epsilons) {
            *o = if det <= eps { 1.0 } else { 0.0 };
        }
        true
    })?;

    let inverse = estimate_many(d, nd.powers.len(), cfg, |x, out| {
        let det = det_at(x);
        if det <= nd.zero_tol {
            return false;
        }
        for (o, &p) in out.iter_mut().zip(&nd.powers) {
            *o = det.powf(-p);
        }
        true
    });
    let inverse_moments = match inverse {
        Ok(r) => nd.powers.iter().copied().zip(r.into_iter().map(Some)).collect(),
        Err(crate::Error::AllSamplesRejected(_)) => nd.powers.iter().map(|&p| (p, None)).collect(),
        Err(e) => return Err(e),
    };

    let prob_zero = probs[0];
    let upper = prob_zero.mean + cfg.confidence_multiplier * prob_zero.std_error;
    Ok(NondegeneracyReport {
        prob_zero,
        prob_below: nd.epsilons.iter().copied().zip(probs[1..].iter().copied()).collect(),
        inverse_moments,
        criterion_plausible: upper < nd.threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(d: usize, i: usize) -> PolyFunctional<f64> {
        PolyFunctional::variable(d, i)
    }

    #[test]
    fn linear_functional_is_nondegenerate() {
        let r = nondegeneracy_report(&[xi(1, 0)], &McConfig::new(5000, 1), &NondegeneracyConfig::default())
            .unwrap();
        assert_eq!(r.prob_zero.mean, 0.0);
        assert!(r.prob_below.iter().all(|(_, e)| e.mean == 0.0));
        assert!(r.criterion_plausible);
        let (_, m) = &r.inverse_moments[0];
        assert_eq!(m.unwrap().mean, 1.0);
    }

    #[test]
    fn repeated_functional_is_degenerate() {
        let r = nondegeneracy_report(
            &[xi(1, 0), xi(1, 0)],
            &McConfig::new(5000, 1),
            &NondegeneracyConfig::default(),
        )
        .unwrap();
        assert_eq!(r.prob_zero.mean, 1.0);
        assert!(!r.criterion_plausible);
        assert!(r.inverse_moments.iter().all(|(_, m)| m.is_none()));
    }
}
