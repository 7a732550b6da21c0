//! Truncated root-raised-cosine transmit pulse.

use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::config::NbConfig;
use crate::math;

// Relative distance from a removable singularity below which the analytic
// limit is used instead of the closed form.
const SINGULAR_EPS: f64 = 1e-9;

/// Root-raised-cosine pulse with roll-off `α`, symbol period `T`, truncated
/// to `|t| ≤ span·T` and scaled to unit energy (`p(t)` carries a `1/√T`
/// factor, so `∫p² dt = 1` before truncation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrcPulse {
    pub rolloff: f64,
    pub symbol_period_s: f64,
    pub span_symbols: usize,
}

impl RrcPulse {
    pub fn new(rolloff: f64, symbol_period_s: f64, span_symbols: usize) -> RrcPulse {
        RrcPulse {
            rolloff,
            symbol_period_s,
            span_symbols,
        }
    }

    pub fn from_config(nb: &NbConfig) -> RrcPulse {
        RrcPulse::new(nb.rolloff, nb.symbol_period_s, nb.pulse_span_symbols)
    }

    /// Half-width of the support in seconds.
    pub fn half_width_s(&self) -> f64 {
        self.span_symbols as f64 * self.symbol_period_s
    }

    pub fn eval(&self, t: f64) -> f64 {
        let period = self.symbol_period_s;
        let x = t / period;
        if math::abs(x) > self.span_symbols as f64 {
            return 0.0;
        }
        let a = self.rolloff;
        let norm = 1.0 / math::sqrt(period);
        if math::abs(x) < SINGULAR_EPS {
            return norm * (1.0 - a + 4.0 * a / PI);
        }
        let four_ax = 4.0 * a * x;
        if a > 0.0 && math::abs(1.0 - four_ax * four_ax) < SINGULAR_EPS {
            let arg = PI / (4.0 * a);
            return norm * a / core::f64::consts::SQRT_2
                * ((1.0 + 2.0 / PI) * math::sin(arg) + (1.0 - 2.0 / PI) * math::cos(arg));
        }
        let num = math::sin(PI * x * (1.0 - a)) + four_ax * math::cos(PI * x * (1.0 + a));
        let den = PI * x * (1.0 - four_ax * four_ax);
        norm * num / den
    }
}
