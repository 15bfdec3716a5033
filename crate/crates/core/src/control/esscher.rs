//! Investment with a stochastic cost `e^{Y}` for an independent Lévy `Y`.
//!
//! Dividing by the cost and tilting `Y` by `e^{Y_t - psi_Y(1) t}` turns the
//! problem into the constant-cost one driven by `Z = X - Y~` at rate
//! `r - psi_Y(1)`, where `Y~` is `Y` under the tilted measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::func::RealFn;
use crate::levy::{difference_model, esscher_tilt, Discount, LevyModel};

use super::invest::{invest_index, InvestSpec, Production};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsscherReduction {
    pub z: LevyModel,
    pub tilted_y: LevyModel,
    pub r_tilde: f64,
    /// `theta*_t = sup_{u <= t} beta_coef e^{Z_u / alpha}`.
    pub beta_coef: f64,
    pub alpha: f64,
}

impl EsscherReduction {
    pub fn discount(&self) -> Discount {
        Discount::new(self.r_tilde).expect("validated when built")
    }

    pub fn index(&self, z: f64) -> f64 {
        self.beta_coef * (z / self.alpha).exp()
    }
}

/// Investment spec of the reduced problem: `p(theta) = theta^{1-alpha} /
/// (1 - alpha)`, `q(z) = e^z`, unit cost.
pub fn reduced_spec(alpha: f64) -> Result<InvestSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    InvestSpec::new(
        Production::Power {
            coef: 1.0 / (1.0 - alpha),
            exponent: 1.0 - alpha,
        },
        RealFn::exp(),
        1.0,
    )
}

pub fn esscher_reduce(
    model_x: &LevyModel,
    model_y: &LevyModel,
    r: Discount,
    alpha: f64,
) -> Result<EsscherReduction> {
    let spec = reduced_spec(alpha)?;
    let psi_y1 = model_y
        .laplace_exponent(1.0)
        .map_err(|e| Error::Precondition(format!("E[e^Y] must be finite: {e}")))?;
    let r_tilde = r.value() - psi_y1;
    if !(r_tilde > 0.0) {
        return Err(Error::Precondition(format!(
            "reduced rate r - psi_Y(1) = {r_tilde} must be positive"
        )));
    }
    let tilted_y = esscher_tilt(model_y, 1.0)?;
    let z = difference_model(model_x, &tilted_y);
    let rt = Discount::new(r_tilde)?;
    let beta_coef = invest_index(&spec, &z, rt, 0.0)?;
    Ok(EsscherReduction {
        z,
        tilted_y,
        r_tilde,
        beta_coef,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cost_process_is_identity() {
        let x = LevyModel::brownian(-0.2, 0.8).unwrap();
        let r = Discount::new(0.5).unwrap();
        let red = esscher_reduce(&x, &LevyModel::zero(), r, 0.5).unwrap();
        assert_eq!(red.z, x);
        assert_eq!(red.r_tilde, 0.5);
        let direct = invest_index(&reduced_spec(0.5).unwrap(), &x, r, 0.0).unwrap();
        assert_eq!(red.beta_coef.to_bits(), direct.to_bits());
    }

    #[test]
    fn brownian_pair() {
        let bm = LevyModel::standard_brownian();
        let red = esscher_reduce(&bm, &bm, Discount::new(1.0).unwrap(), 0.5).unwrap();
        assert_eq!(red.z.drift, -1.0);
        assert!((red.z.sigma - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(red.r_tilde, 0.5);
        let eta = (3f64.sqrt() - 1.0) / 2.0;
        let want = (2.0 * eta / (eta + 1.0)).powi(2);
        assert!((red.beta_coef - want).abs() < 1e-12 * want);
    }
}
