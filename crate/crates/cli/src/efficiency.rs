//! Exact qubit-efficiency arithmetic.
//!
//! Efficiency is the number of classical bits a protocol computes divided
//! by the quantum plus classical resources it consumes. Every result is an
//! exact reduced fraction; the floating-point field on an entry is a
//! convenience for plotting, never the value of record.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

/// Resource counts of one protocol execution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EfficiencyInputs {
    /// Classical bits computed.
    pub nu: u64,
    /// Qubits consumed.
    pub q: u64,
    /// Classical bits consumed.
    pub r: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficiencyError {
    /// `q + r = 0` leaves the ratio undefined.
    ZeroResources,
    /// A table parameter that must be positive was zero.
    NonPositiveParameter(&'static str),
}

impl fmt::Display for EfficiencyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroResources => write!(f, "efficiency is undefined when q + r = 0"),
            Self::NonPositiveParameter(name) => {
                write!(f, "table parameter `{name}` must be positive")
            }
        }
    }
}

impl std::error::Error for EfficiencyError {}

/// `nu / (q + r)` as an exact reduced fraction.
pub fn qubit_efficiency(e: EfficiencyInputs) -> Result<Ratio<u64>, EfficiencyError> {
    let resources = e.q + e.r;
    if resources == 0 {
        return Err(EfficiencyError::ZeroResources);
    }
    Ok(Ratio::new(e.nu, resources))
}

/// Parameters of the six-way comparison: this protocol's secret length `n`
/// and pair padding `delta`, the compared protocols' secret lengths `l` and
/// `m`, and the qudit dimension `d` of the dimension-parametrized entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TableParams {
    pub n: u64,
    pub delta: u64,
    pub l: u64,
    pub m: u64,
    pub d: u64,
}

impl TableParams {
    /// Defaults for a report: comparison secret lengths match `n` and the
    /// dimension-parametrized entry is evaluated at the qubit case `d = 1`.
    pub fn from_protocol(n: u64, delta: u64) -> Self {
        Self { n, delta, l: n, m: n, d: 1 }
    }

    pub fn validate(&self) -> Result<(), EfficiencyError> {
        for (name, value) in [
            ("n", self.n),
            ("delta", self.delta),
            ("L", self.l),
            ("m", self.m),
            ("d", self.d),
        ] {
            if value == 0 {
                return Err(EfficiencyError::NonPositiveParameter(name));
            }
        }
        Ok(())
    }
}

/// One labeled row of the efficiency comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyEntry {
    pub id: &'static str,
    pub nu: u64,
    pub q: u64,
    pub r: u64,
    /// Numerator of the reduced fraction.
    pub numerator: u64,
    /// Denominator of the reduced fraction.
    pub denominator: u64,
    /// The reduced fraction as text, e.g. `"1/23"`.
    pub exact: String,
    /// Floating-point convenience value of the fraction.
    pub value: f64,
}

fn entry(id: &'static str, inputs: EfficiencyInputs) -> Result<EfficiencyEntry, EfficiencyError> {
    let ratio = qubit_efficiency(inputs)?;
    let (numerator, denominator) = (*ratio.numer(), *ratio.denom());
    Ok(EfficiencyEntry {
        id,
        nu: inputs.nu,
        q: inputs.q,
        r: inputs.r,
        numerator,
        denominator,
        exact: format!("{numerator}/{denominator}"),
        value: numerator as f64 / denominator as f64,
    })
}

/// This protocol's own row: `n` computed bits from two carrier sequences of
/// `8(n + delta)` qubits each plus three `n`-bit share publications.
pub fn this_protocol_entry(n: u64, delta: u64) -> Result<EfficiencyEntry, EfficiencyError> {
    entry("this-protocol", EfficiencyInputs { nu: n, q: 16 * (n + delta), r: 3 * n })
}

/// The six-entry comparison table evaluated at the given parameters.
///
/// The five compared designs, in table order, consume per computed bit:
/// five qubits and three classical bits; `6(ceil(L/2) + delta)` qubits and
/// three classical bits per bit over an `L`-bit secret; `3(1 + d)` qubits
/// and three classical bits for a single bit at qudit dimension `d`; three
/// qubits and one classical bit; and six qubits and three classical bits.
/// The final entry is this protocol's.
pub fn efficiency_table(params: &TableParams) -> Result<Vec<EfficiencyEntry>, EfficiencyError> {
    params.validate()?;
    let TableParams { n, delta, l, m, d } = *params;
    let half_l = l.div_ceil(2);
    Ok(vec![
        entry("comparison-1", EfficiencyInputs { nu: l, q: 5 * l, r: 3 * l })?,
        entry("comparison-2", EfficiencyInputs { nu: l, q: 6 * (half_l + delta), r: 3 * l })?,
        entry("comparison-3", EfficiencyInputs { nu: 1, q: 3 * (1 + d), r: 3 })?,
        entry("comparison-4", EfficiencyInputs { nu: l, q: 3 * l, r: l })?,
        entry("comparison-5", EfficiencyInputs { nu: m, q: 6 * m, r: 3 * m })?,
        this_protocol_entry(n, delta)?,
    ])
}
