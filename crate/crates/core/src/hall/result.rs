use num_complex::Complex64;
use serde::Serialize;

use crate::model::TraceWindow;

/// Distance to the nearest integer below which a value is declared an integer.
pub const INTEGER_THRESHOLD: f64 = 0.05;
/// Up to this distance the value is reported as indeterminate.
pub const INDETERMINATE_THRESHOLD: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HallMethod {
    KuboStreda,
    LatticeSum,
    Index,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "kebab-case")]
pub enum Quantization {
    Integer(i64),
    Indeterminate,
    NonInteger,
}

/// One Hall-conductance evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HallResult {
    pub value: f64,
    pub raw: Complex64,
    pub method: HallMethod,
    pub imag_residual: f64,
    pub integrality_residual: f64,
    pub quantization: Quantization,
    pub window: Option<TraceWindow>,
    pub truncation_radius: Option<usize>,
    /// `|result(r) - result(r - 2)|` for the lattice sum.
    pub tail_sensitivity: Option<f64>,
    /// `‖P - Γ_a P Γ_a^*‖_3` for the index.
    pub schatten3: Option<f64>,
}

impl HallResult {
    pub(crate) fn new(raw: Complex64, method: HallMethod) -> Self {
        let value = raw.re;
        let nearest = value.round();
        let residual = (value - nearest).abs();
        let quantization = if residual <= INTEGER_THRESHOLD {
            Quantization::Integer(nearest as i64)
        } else if residual <= INDETERMINATE_THRESHOLD {
            Quantization::Indeterminate
        } else {
            Quantization::NonInteger
        };
        Self {
            value,
            raw,
            method,
            imag_residual: raw.im.abs(),
            integrality_residual: residual,
            quantization,
            window: None,
            truncation_radius: None,
            tail_sensitivity: None,
            schatten3: None,
        }
    }

    pub fn nearest_integer(&self) -> i64 {
        self.value.round() as i64
    }
}
