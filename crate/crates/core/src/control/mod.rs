//! Singular controls: the monotone follower, irreversible investment, their
//! cost functionals and first-order verification.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::levy::SamplePath;

pub mod esscher;
pub mod foc;
pub mod follower;
pub mod functional;
pub mod invest;

pub use esscher::{esscher_reduce, reduced_spec, EsscherReduction};
pub use foc::{subgradient_path, verify_first_order, InnerConfig, SubgradientPath, Tolerances, VerificationReport};
pub use follower::{follower_control, follower_threshold, FollowerCostSpec};
pub use functional::{cost_functional, policy_costs, Problem};
pub use invest::{invest_control, invest_index, CobbDouglasSpec, InvestIndex, InvestSpec, Production};

/// Nondecreasing control on the path grid. `theta[0]` is the jump at time
/// zero from `theta_{0-} = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    pub step: f64,
    pub theta: Vec<f64>,
}

impl ControlPath {
    pub fn is_nondecreasing(&self) -> bool {
        self.theta.first().is_none_or(|&t| t >= 0.0) && self.theta.windows(2).all(|w| w[1] >= w[0])
    }

    /// Increment at grid index `i`, counting the initial jump at `i = 0`.
    #[inline]
    pub fn increment(&self, i: usize) -> f64 {
        if i == 0 {
            self.theta[0]
        } else {
            self.theta[i] - self.theta[i - 1]
        }
    }
}

/// A pure path functional producing a control.
pub trait Strategy: Send + Sync {
    fn name(&self) -> String;
    fn control(&self, path: &SamplePath) -> ControlPath;
}

/// Never acts.
#[derive(Debug, Clone, Copy)]
pub struct ZeroControl;

impl Strategy for ZeroControl {
    fn name(&self) -> String {
        "zero".into()
    }

    fn control(&self, path: &SamplePath) -> ControlPath {
        ControlPath {
            step: path.step,
            theta: vec![0.0; path.len()],
        }
    }
}

/// Jumps to `level` at time zero and stays there.
#[derive(Debug, Clone, Copy)]
pub struct ConstantControl {
    pub level: f64,
}

impl Strategy for ConstantControl {
    fn name(&self) -> String {
        format!("constant:{}", self.level)
    }

    fn control(&self, path: &SamplePath) -> ControlPath {
        ControlPath {
            step: path.step,
            theta: vec![self.level.max(0.0); path.len()],
        }
    }
}

/// Reflection of `X - theta` below `threshold`.
#[derive(Debug, Clone, Copy)]
pub struct FollowerThreshold {
    pub threshold: f64,
}

impl Strategy for FollowerThreshold {
    fn name(&self) -> String {
        format!("threshold:{}", self.threshold)
    }

    fn control(&self, path: &SamplePath) -> ControlPath {
        follower_control(path, self.threshold)
    }
}

/// Running maximum of a nondecreasing index `L` along the path.
#[derive(Clone)]
pub struct IndexControl {
    pub name: String,
    pub index: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for IndexControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexControl({})", self.name)
    }
}

impl Strategy for IndexControl {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn control(&self, path: &SamplePath) -> ControlPath {
        invest_control(path, |x| (self.index)(x))
    }
}
