use serde::{Deserialize, Serialize};

use super::NetError;

/// Per-sample training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Loss {
    /// `|(y - y*) / y|`, the MLP loss.
    RelativeAbsolute,
    /// `(y - y*)^2`, the LSTM loss.
    Squared,
}

impl Loss {
    /// Loss value and its derivative with respect to the prediction.
    pub fn eval(self, y_true: f64, y_pred: f64) -> Result<(f64, f64), NetError> {
        match self {
            Loss::RelativeAbsolute => loss_mlp(y_true, y_pred),
            Loss::Squared => Ok(loss_lstm(y_true, y_pred)),
        }
    }
}

/// Relative absolute error. The subgradient at `y_pred == y_true` is 0.
pub fn loss_mlp(y_true: f64, y_pred: f64) -> Result<(f64, f64), NetError> {
    if y_true == 0.0 {
        return Err(NetError::ZeroTrueValue);
    }
    let diff = y_pred - y_true;
    let value = (diff / y_true).abs();
    let grad = if diff == 0.0 {
        0.0
    } else {
        diff.signum() / y_true.abs()
    };
    Ok((value, grad))
}

/// Squared error.
pub fn loss_lstm(y_true: f64, y_pred: f64) -> (f64, f64) {
    let diff = y_pred - y_true;
    (diff * diff, 2.0 * diff)
}
