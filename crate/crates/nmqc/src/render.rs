//! Operator-string rendering of Bell functionals.

use nmqc_core::classical::classical_bound;
use nmqc_core::protocol::ProtocolInstance;
use nmqc_core::quantum::{axis_letter, beta_quantum, MeasurementPlan, NoiseSpec};
use nmqc_core::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

const MINUS: &str = "\u{2212}";

pub fn format_fraction(r: &Rational) -> String {
    let r = r.reduced();
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        let sign = if r.is_negative() { MINUS } else { "" };
        format!("{sign}{}/{}", r.numer().abs(), r.denom())
    }
}

/// Three decimals, ties rounded away from zero.
pub fn three_decimals(x: f64) -> String {
    format!("{:.3}", (x * 1000.0).round() / 1000.0)
}

/// `r` written over `den` when that is exact and `r` is not an integer.
fn format_over(r: &Rational, den: &BigInt) -> String {
    if r.is_integer() || !(den % r.denom()).is_zero() {
        return format_fraction(r);
    }
    let num = r.numer() * (den / r.denom());
    let sign = if num.is_negative() { MINUS } else { "" };
    format!("{sign}{}/{den}", num.abs())
}

/// The rational with denominator `den` within `1e-9` of `x`, if any.
pub fn snap_to_fraction(x: f64, den: &BigInt) -> Option<Rational> {
    let d = den.to_f64()?;
    let k = (x * d).round();
    ((x * d - k).abs() < 1e-9 * d.max(1.0)).then(|| Rational::new(BigInt::from(k as i64), den.clone()))
}

/// Operator for one setting and whether axis signs flipped it. Plans with
/// any non-axis angle are written as `⊗` products with `R(θ)` factors.
fn operator(plan: &MeasurementPlan, setting: u32, tensor: bool) -> (bool, String) {
    let mut negative = false;
    let factors: Vec<String> = plan
        .angles_for(setting)
        .iter()
        .map(|&a| match axis_letter(a) {
            Some(l) => {
                negative ^= l.starts_with('-');
                l.trim_start_matches('-').to_string()
            }
            None => format!("R({a:.4})"),
        })
        .collect();
    (negative, factors.join(if tensor { "⊗" } else { "" }))
}

fn axis_plan(plan: &MeasurementPlan) -> bool {
    plan.flat().iter().all(|&a| axis_letter(a).is_some())
}

struct MagnitudeGroup {
    magnitude: Rational,
    /// (negative, operator)
    terms: Vec<(bool, String)>,
}

fn magnitude_groups(inst: &ProtocolInstance, plan: &MeasurementPlan) -> Vec<MagnitudeGroup> {
    let tensor = !axis_plan(plan);
    let mut groups: Vec<MagnitudeGroup> = Vec::new();
    for g in inst.settings_groups() {
        if g.coefficient.is_zero() {
            continue;
        }
        let (flipped, op) = operator(plan, g.setting, tensor);
        let negative = g.coefficient.is_negative() ^ flipped;
        let magnitude = g.coefficient.abs();
        match groups.iter_mut().find(|m| m.magnitude == magnitude) {
            Some(m) => m.terms.push((negative, op)),
            None => groups.push(MagnitudeGroup {
                magnitude,
                terms: vec![(negative, op)],
            }),
        }
    }
    groups
}

fn sign(negative: bool) -> &'static str {
    if negative {
        MINUS
    } else {
        "+"
    }
}

/// Terms grouped by coefficient magnitude, e.g.
/// `3/10 ⟨XXXX⟩ − 1/10 ⟨XXYY + XYXY⟩`.
pub fn render_functional(inst: &ProtocolInstance, plan: &MeasurementPlan) -> String {
    let groups = magnitude_groups(inst, plan);
    if groups.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (gi, g) in groups.iter().enumerate() {
        let factored = gi > 0 && g.terms[0].0;
        if gi > 0 {
            out.push_str(&format!(" {} ", sign(factored)));
        }
        out.push_str(&format_fraction(&g.magnitude));
        out.push_str(" ⟨");
        for (ti, (negative, op)) in g.terms.iter().enumerate() {
            let negative = negative ^ factored;
            if ti == 0 {
                if negative {
                    out.push_str(MINUS);
                }
            } else {
                out.push_str(&format!(" {} ", sign(negative)));
            }
            out.push_str(op);
        }
        out.push('⟩');
    }
    out
}

/// Common denominator of the group magnitudes, or `None` for one group.
fn shared_denominator(inst: &ProtocolInstance, plan: &MeasurementPlan) -> Option<BigInt> {
    let groups = magnitude_groups(inst, plan);
    (groups.len() > 1).then(|| {
        groups
            .iter()
            .fold(BigInt::one(), |d, g| d.lcm(g.magnitude.denom()))
    })
}

/// Formats a bound on the inequality's scale: over the shared denominator
/// when there are several coefficient magnitudes, reduced otherwise.
/// Inexact quantum values fall back to five decimals.
pub struct BoundFormatter {
    denominator: BigInt,
    shared: bool,
}

impl BoundFormatter {
    pub fn new(inst: &ProtocolInstance, plan: &MeasurementPlan) -> Self {
        let shared = shared_denominator(inst, plan);
        let denominator = shared.clone().unwrap_or_else(|| {
            inst.functional()
                .coefficients()
                .iter()
                .fold(BigInt::one(), |d, c| d.lcm(c.denom()))
        });
        Self {
            denominator,
            shared: shared.is_some(),
        }
    }

    pub fn exact(&self, r: &Rational) -> String {
        if self.shared {
            format_over(r, &self.denominator)
        } else {
            format_fraction(r)
        }
    }

    /// The exact value `x` snaps to, if any.
    pub fn snap(&self, x: f64) -> Option<Rational> {
        snap_to_fraction(x, &self.denominator)
    }

    pub fn approx(&self, x: f64) -> String {
        match self.snap(x) {
            Some(r) => self.exact(&r),
            None => format!("{x:.5}"),
        }
    }
}

/// The functional followed by its classical bound and the value the plan
/// reaches, e.g. `1/8 ⟨XXXX − …⟩ ≤ 1/2 (classical), 1 (quantum)`.
pub fn render_inequality(inst: &ProtocolInstance, plan: &MeasurementPlan) -> nmqc_core::Result<String> {
    let c = classical_bound(inst)?.bound;
    let q = beta_quantum(inst, plan, NoiseSpec::Ideal)?;
    let fmt = BoundFormatter::new(inst, plan);
    Ok(format!(
        "{} ≤ {} (classical), {} (quantum)",
        render_functional(inst, plan),
        fmt.exact(&c),
        fmt.approx(q)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nmqc_core::protocol::paper_instance;

    #[test]
    fn fractions() {
        let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
        assert_eq!(format_fraction(&r(4, 10)), "2/5");
        assert_eq!(format_fraction(&r(-1, 2)), "−1/2");
        assert_eq!(format_fraction(&r(3, 1)), "3");
        assert_eq!(format_over(&r(2, 5), &BigInt::from(10)), "4/10");
        assert_eq!(format_over(&r(1, 3), &BigInt::from(10)), "1/3");
        assert_eq!(format_over(&r(1, 1), &BigInt::from(10)), "1");
        assert_eq!(three_decimals(0.8125), "0.813");
        assert_eq!(three_decimals(0.9375), "0.938");
        assert_eq!(snap_to_fraction(0.8, &BigInt::from(10)), Some(r(4, 5)));
        assert_eq!(snap_to_fraction(std::f64::consts::FRAC_1_SQRT_2, &BigInt::from(10)), None);
    }

    #[test]
    fn axis_signs_fold_into_the_coefficient() {
        let inst = paper_instance("h3").unwrap();
        let mut angles = MeasurementPlan::xy(4).angles().to_vec();
        angles[0] = [std::f64::consts::PI, 3.0 * std::f64::consts::FRAC_PI_2];
        let plan = MeasurementPlan::new(angles).unwrap();
        assert_eq!(
            render_functional(&inst, &plan),
            "1/8 ⟨−XXXX + XXYY + XYXY + XYYX + YXXY + YXYX + YYXX − YYYY⟩"
        );
    }

    #[test]
    fn general_angles_use_rotation_notation() {
        let inst = paper_instance("h3").unwrap();
        let mut angles = MeasurementPlan::xy(4).angles().to_vec();
        angles[3] = [0.5, std::f64::consts::FRAC_PI_2];
        let plan = MeasurementPlan::new(angles).unwrap();
        let text = render_functional(&inst, &plan);
        assert!(text.starts_with("1/8 ⟨X⊗X⊗X⊗R(0.5000) − X⊗X⊗Y⊗Y − X⊗Y⊗X⊗Y − X⊗Y⊗Y⊗R(0.5000)"), "{text}");
    }
}
