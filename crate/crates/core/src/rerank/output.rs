use serde::{Deserialize, Serialize};

use super::{FairnessParams, McStrategy, Mode, Objective};

/// Metadata written next to a re-ranked score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RerankSidecar {
    pub params: FairnessParams,
    pub mode: Mode,
    pub objective_value: f64,
    pub objective: Objective,
    pub mc_strategy: McStrategy,
    /// Weights after dropping terms with a degenerate group.
    pub applied_lambda1: f64,
    pub applied_lambda2: f64,
}

impl RerankSidecar {
    pub fn new(params: FairnessParams, objective: Objective, applied: (f64, f64)) -> Self {
        RerankSidecar {
            params,
            mode: params.mode,
            objective_value: objective.value,
            objective,
            mc_strategy: params.mc_strategy,
            applied_lambda1: applied.0,
            applied_lambda2: applied.1,
        }
    }
}
