//! Circuit-QED parameter extraction: from raw circuit element values to the
//! effective oscillator (C-tilde, L-tilde) and the derived lattice parameters
//! (omega, lambda, delta_omega, U, J), with validity warnings for the
//! approximations behind the closed forms.
//!
//! Default units are natural: `phi0 = 1` and the charging energy defined as
//! `E_C = e^2 / 2C` with `e = 1`. An SI constructor converts farads, henries
//! and joules into the same internal convention, so ratio outputs (`U/J`,
//! `delta_omega/omega`) are unit-safe either way.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("element values must be positive: {0}")]
    NonPositiveElement(&'static str),
    #[error("pump junction energy must be non-negative")]
    NegativePumpJunction,
    #[error(
        "imaginary resonator frequency: 1/L' + 3/L - E_JU/phi0^2 = {0:.6e} <= 0; \
         increase the shunt inductance or reduce E_JU"
    )]
    ImaginaryFrequency(f64),
}

/// Raw circuit element values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitElements {
    /// Coupling capacitance between neighboring nodes.
    pub c: f64,
    /// Junction (on-site) capacitance.
    pub c_j: f64,
    /// Coupling inductance.
    pub l: f64,
    /// Shunt inductance.
    pub l_prime: f64,
    /// Josephson energy of the on-site (Kerr) junction.
    pub e_j_u: f64,
    /// Josephson energy of the pump junction.
    pub e_j_omega: f64,
    /// Reduced flux quantum; 1 in natural units.
    pub phi0: f64,
    /// Charge unit entering `E_C = e^2/2C`; 1 in natural units.
    pub e_charge: f64,
}

impl CircuitElements {
    /// Natural-unit constructor (`phi0 = e = 1`).
    pub fn natural(c: f64, c_j: f64, l: f64, l_prime: f64, e_j_u: f64, e_j_omega: f64) -> Self {
        Self { c, c_j, l, l_prime, e_j_u, e_j_omega, phi0: 1.0, e_charge: 1.0 }
    }

    /// SI constructor: capacitances in farads, inductances in henries,
    /// junction energies in joules. Internally `hbar = 1`, so energies come
    /// out in angular-frequency units (rad/s).
    pub fn si(c: f64, c_j: f64, l: f64, l_prime: f64, e_j_u_joule: f64, e_j_omega_joule: f64) -> Self {
        const HBAR: f64 = 1.054_571_817e-34;
        const E_CHARGE: f64 = 1.602_176_634e-19;
        let phi0 = HBAR / (2.0 * E_CHARGE);
        Self {
            c,
            c_j,
            l,
            l_prime,
            e_j_u: e_j_u_joule / HBAR,
            e_j_omega: e_j_omega_joule / HBAR,
            phi0: phi0 / HBAR.sqrt(), // keeps phi0^2/L an angular frequency
            e_charge: E_CHARGE / HBAR.sqrt(),
        }
    }

    fn validate(&self) -> Result<(), CircuitError> {
        for (v, name) in [
            (self.c, "C"),
            (self.c_j, "C_J"),
            (self.l, "L"),
            (self.l_prime, "L'"),
            (self.e_j_u, "E_JU"),
            (self.phi0, "phi0"),
            (self.e_charge, "e"),
        ] {
            if v <= 0.0 && !(name == "E_JU" && v == 0.0) {
                return Err(CircuitError::NonPositiveElement(name));
            }
        }
        if self.e_j_omega < 0.0 {
            return Err(CircuitError::NegativePumpJunction);
        }
        Ok(())
    }
}

/// A violated regime assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "detail")]
pub enum RegimeWarning {
    /// `C/C~ > 0.05`: the Legendre transformation assumed `C/(C_J + 3C) << 1`.
    CapacitiveLoading { ratio: f64 },
    /// `lambda > 0.5`: the cosine expansion was truncated at fourth order,
    /// valid for large `E_L~/E_C~`.
    QuarticTruncation { lambda: f64 },
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeWarning::CapacitiveLoading { ratio } => write!(
                f,
                "C/C~ = {ratio:.4} > 0.05 violates the Legendre-transformation assumption C/(C_J + 3C) << 1"
            ),
            RegimeWarning::QuarticTruncation { lambda } => write!(
                f,
                "lambda = {lambda:.4} > 0.5: quartic truncation of the cosine needs large E_L~/E_C~"
            ),
        }
    }
}

/// Derived effective-circuit and lattice parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDerived {
    pub c_tilde: f64,
    pub l_tilde: f64,
    pub e_c_tilde: f64,
    pub e_l_tilde: f64,
    /// Bare resonator frequency `1/sqrt(L~ C~)`.
    pub omega: f64,
    /// Zero-point flux spread `(2 E_C~/E_L~)^(1/4)`.
    pub lambda: f64,
    /// Frequency correction `E_JU lambda^2 (1 - e^(-lambda^2/2))`.
    pub delta_omega: f64,
    /// Kerr nonlinearity `E_JU lambda^4 e^(-lambda^2/2) / 2`.
    pub u: f64,
    /// Hopping `omega/2 (L~/L - C/C~)`.
    pub j: f64,
    pub warnings: Vec<RegimeWarning>,
}

/// Effective capacitance and inductance:
/// `C~ = C_J + 3C`, `L~ = [1/L' + 3/L - E_JU/phi0^2]^(-1)`.
pub fn effective_lc(el: &CircuitElements) -> Result<(f64, f64), CircuitError> {
    el.validate()?;
    let c_tilde = el.c_j + 3.0 * el.c;
    let denom = 1.0 / el.l_prime + 3.0 / el.l - el.e_j_u / (el.phi0 * el.phi0);
    if denom <= 0.0 {
        return Err(CircuitError::ImaginaryFrequency(denom));
    }
    Ok((c_tilde, 1.0 / denom))
}

/// All derived parameters, with regime warnings attached.
pub fn derived_params(el: &CircuitElements) -> Result<CircuitDerived, CircuitError> {
    let (c_tilde, l_tilde) = effective_lc(el)?;
    let e_c_tilde = el.e_charge * el.e_charge / (2.0 * c_tilde);
    let e_l_tilde = el.phi0 * el.phi0 / l_tilde;
    let omega = 1.0 / (l_tilde * c_tilde).sqrt();
    let lambda = (2.0 * e_c_tilde / e_l_tilde).powf(0.25);
    let gaussian = (-lambda * lambda / 2.0).exp();
    let delta_omega = el.e_j_u * lambda * lambda * (1.0 - gaussian);
    let u = el.e_j_u * lambda.powi(4) * gaussian / 2.0;
    let j = omega / 2.0 * (l_tilde / el.l - el.c / c_tilde);
    let mut derived = CircuitDerived {
        c_tilde,
        l_tilde,
        e_c_tilde,
        e_l_tilde,
        omega,
        lambda,
        delta_omega,
        u,
        j,
        warnings: Vec::new(),
    };
    derived.warnings = validate_regime(el, &derived);
    Ok(derived)
}

/// Regime checks; warnings only, never errors.
pub fn validate_regime(el: &CircuitElements, derived: &CircuitDerived) -> Vec<RegimeWarning> {
    let mut warnings = Vec::new();
    let ratio = el.c / derived.c_tilde;
    if ratio > 0.05 {
        warnings.push(RegimeWarning::CapacitiveLoading { ratio });
    }
    if derived.lambda > 0.5 {
        warnings.push(RegimeWarning::QuarticTruncation { lambda: derived.lambda });
    }
    warnings
}

/// Ratio-level reference inputs quoted for the proposed implementation:
/// `L~/L ~ 5e-3`, `lambda ~ 0.4`, `E_J/E_C ~ 1e5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInputs {
    pub l_tilde_over_l: f64,
    pub lambda: f64,
    /// `E_JU / E_C~`. Which charging energy the quoted ratio refers to is
    /// ambiguous (junction vs effective); this input takes the effective one
    /// and the report flags the ambiguity.
    pub ej_over_ec_tilde: f64,
    /// `C / C~` correction in the hopping; 0 for an ideal lattice.
    pub c_over_c_tilde: f64,
}

impl ReferenceInputs {
    pub fn quoted() -> Self {
        Self { l_tilde_over_l: 5e-3, lambda: 0.4, ej_over_ec_tilde: 1e5, c_over_c_tilde: 0.0 }
    }
}

/// Computed ratios juxtaposed with the claimed ones. No equality is asserted:
/// the quoted `E_J/E_C` does not pin down which charging energy it refers to,
/// so the report carries the computed values side by side with the claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub inputs: ReferenceInputs,
    pub u: f64,
    pub j: f64,
    pub delta_omega: f64,
    pub omega: f64,
    pub u_over_j: f64,
    pub delta_omega_over_omega: f64,
    pub claimed_u_over_j: f64,
    pub claimed_delta_omega_over_omega: f64,
    pub ambiguity_note: String,
}

/// Evaluate the closed forms at the reference ratios, normalizing `E_C~ = 1`.
pub fn reference_report(inputs: ReferenceInputs) -> ReferenceReport {
    let e_c = 1.0;
    let e_l = 2.0 * e_c / inputs.lambda.powi(4);
    let l_tilde = 1.0 / e_l; // phi0 = 1
    let c_tilde = 1.0 / (2.0 * e_c);
    let omega = 1.0 / (l_tilde * c_tilde).sqrt();
    let e_j = inputs.ej_over_ec_tilde * e_c;
    let gaussian = (-inputs.lambda * inputs.lambda / 2.0).exp();
    let u = e_j * inputs.lambda.powi(4) * gaussian / 2.0;
    let delta_omega = e_j * inputs.lambda * inputs.lambda * (1.0 - gaussian);
    let j = omega / 2.0 * (inputs.l_tilde_over_l - inputs.c_over_c_tilde);
    ReferenceReport {
        inputs,
        u,
        j,
        delta_omega,
        omega,
        u_over_j: u / j,
        delta_omega_over_omega: delta_omega / omega,
        claimed_u_over_j: 10.0,
        claimed_delta_omega_over_omega: 0.02,
        ambiguity_note: "the quoted E_J/E_C ~ 1e5 does not specify whether E_C is the junction \
                         or the effective charging energy; computed ratios use E_C~ and are \
                         reported without asserting agreement"
            .into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_capacitance_arithmetic() {
        let el = CircuitElements::natural(1.0, 3.0, 3.0, 1.0, 0.0, 0.0);
        let (c_tilde, l_tilde) = effective_lc(&el).unwrap();
        assert_eq!(c_tilde, 6.0);
        // L' = 1, L = 3, E_JU = 0: L~ = 1/(1 + 1) = 0.5
        assert!((l_tilde - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unstable_circuit_is_rejected() {
        let el = CircuitElements::natural(1.0, 3.0, 3.0, 1.0, 2.5, 0.0);
        assert!(matches!(effective_lc(&el), Err(CircuitError::ImaginaryFrequency(_))));
        let borderline = CircuitElements::natural(1.0, 3.0, 3.0, 1.0, 1.99, 0.0);
        assert!(effective_lc(&borderline).is_ok());
    }

    #[test]
    fn lambda_from_energy_ratio() {
        // E_C~/E_L~ = 0.0128 -> lambda = 0.0256^(1/4) = 0.4
        // realize it: E_C~ = 1/(2 C~), E_L~ = 1/L~
        // pick C~ = 0.5 => E_C~ = 1; need E_L~ = 78.125 => L~ = 0.0128
        let el = CircuitElements::natural(0.05, 0.35, 3.0 * 0.0128 / (1.0 - 0.0128 / 10.0), 10.0, 0.0, 0.0);
        // solve 1/L' + 3/L = 1/L~: handled numerically below instead of by hand
        let (c_tilde, l_tilde) = effective_lc(&el).unwrap();
        assert!((c_tilde - 0.5).abs() < 1e-12);
        assert!((l_tilde - 0.0128).abs() < 1e-12);
        let derived = derived_params(&el).unwrap();
        assert!((derived.lambda - 0.4).abs() < 1e-12, "lambda = {}", derived.lambda);
    }

    #[test]
    fn hand_evaluated_corrections() {
        // E_J = 1, lambda = 0.4:
        // delta_omega = 0.16 (1 - e^{-0.08}), U = 0.0256 e^{-0.08} / 2.
        // E_JU enters 1/L~, so L is chosen to land on 1/L~ = 78.125 with it:
        // 1/L' + 3/L - E_JU = 0.1 + 3/L - 1 = 78.125 => L = 3/79.025
        let el = CircuitElements::natural(0.05, 0.35, 3.0 / 79.025, 10.0, 1.0, 0.0);
        let derived = derived_params(&el).unwrap();
        assert!((derived.lambda - 0.4).abs() < 1e-12, "lambda = {}", derived.lambda);
        let delta_expected = 0.16 * (-(-0.08f64).exp_m1());
        let u_expected = 0.0128 * (-0.08f64).exp();
        assert!((derived.delta_omega - delta_expected).abs() < 1e-12);
        assert!((derived.u - u_expected).abs() < 1e-12);
        // frozen decimals from an independent evaluation
        assert!((derived.delta_omega - 0.012301384578138274).abs() < 1e-12);
        assert!((derived.u - 0.011815889233748927).abs() < 1e-12);
    }

    #[test]
    fn dimensional_self_consistency() {
        let el = CircuitElements::natural(0.02, 1.3, 5.0, 2.0, 0.05, 0.01);
        let d = derived_params(&el).unwrap();
        assert!((d.omega * d.omega * d.l_tilde * d.c_tilde - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regime_warnings() {
        // clean regime: no warnings
        let el = CircuitElements::natural(0.004, 1.0, 200.0, 0.05, 0.05, 0.0);
        let d = derived_params(&el).unwrap();
        assert!(d.warnings.is_empty(), "{:?} (lambda = {})", d.warnings, d.lambda);
        // C = C_J: C/C~ = 0.25 -> loading warning
        let el = CircuitElements::natural(1.0, 1.0, 200.0, 0.4, 0.05, 0.0);
        let d = derived_params(&el).unwrap();
        assert!(d
            .warnings
            .iter()
            .any(|w| matches!(w, RegimeWarning::CapacitiveLoading { ratio } if (ratio - 0.25).abs() < 1e-12)));
        // large lambda -> truncation warning
        let el = CircuitElements::natural(0.004, 0.05, 200.0, 30.0, 0.0, 0.0);
        let d = derived_params(&el).unwrap();
        assert!(d.lambda > 0.5);
        assert!(d.warnings.iter().any(|w| matches!(w, RegimeWarning::QuarticTruncation { .. })));
    }

    #[test]
    fn monotonicity_of_closed_forms() {
        // U strictly increasing in E_JU at fixed lambda <= 0.5
        let lambda: f64 = 0.45;
        let gaussian = (-lambda * lambda / 2.0).exp();
        let u = |ej: f64| ej * lambda.powi(4) * gaussian / 2.0;
        let mut prev = 0.0;
        for k in 1..=20 {
            let val = u(k as f64 * 0.1);
            assert!(val > prev);
            prev = val;
        }
        // J strictly increasing in L~/L at fixed omega
        let omega = 3.0;
        let j = |ratio: f64| omega / 2.0 * (ratio - 0.001);
        let mut prev = f64::NEG_INFINITY;
        for k in 1..=20 {
            let val = j(k as f64 * 1e-3);
            assert!(val > prev);
            prev = val;
        }
    }

    #[test]
    fn reference_point_report() {
        let rep = reference_report(ReferenceInputs::quoted());
        // the tool's own formulas at the quoted ratios
        assert!((rep.omega - 12.5).abs() < 1e-12);
        assert!((rep.u - 1181.5889233748927).abs() < 1e-9);
        assert!((rep.j - 0.03125).abs() < 1e-12);
        // juxtaposition only; the claims are carried, not asserted
        assert_eq!(rep.claimed_u_over_j, 10.0);
        assert_eq!(rep.claimed_delta_omega_over_omega, 0.02);
        assert!(!rep.ambiguity_note.is_empty());
    }
}
