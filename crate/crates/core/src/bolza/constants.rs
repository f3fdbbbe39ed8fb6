//! Closed-form systolic constants in genus two.

use serde::Serialize;

use crate::exact::{func, num, pi, sqrt, Expr, Func};

#[derive(Debug, Clone, Serialize)]
pub struct Constant {
    pub key: &'static str,
    pub label: &'static str,
    #[serde(serialize_with = "as_string")]
    pub exact: Expr,
    pub value: f64,
}

fn as_string<S: serde::Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

impl Constant {
    fn new(key: &'static str, label: &'static str, exact: Expr) -> Self {
        let value = exact.eval();
        Self {
            key,
            label,
            exact,
            value,
        }
    }
}

/// Systole of the Jenni surface, `2 log(1 + √2 + √(2 + 2√2))`.
pub fn jenni_systole() -> Expr {
    let s2 = || sqrt(num(2.0));
    num(2.0) * func(Func::Log, num(1.0) + s2() + sqrt(num(2.0) + num(2.0) * s2()))
}

/// The same systole written as `2 cosh⁻¹(1 + √2)`.
pub fn jenni_systole_acosh() -> Expr {
    num(2.0) * func(Func::Acosh, num(1.0) + sqrt(num(2.0)))
}

pub fn flat_bolza_ratio() -> Expr {
    (num(1.0) / num(3.0)) * (sqrt(num(2.0)) + num(1.0))
}

pub fn cat0_bound() -> Expr {
    (num(1.0) / num(3.0)) * func(Func::Cot, pi() / num(8.0))
}

/// Every named constant, in display order.
pub fn exact_constants() -> Vec<Constant> {
    vec![
        Constant::new("berger", "Berger", num(2.0) / num(3.0)),
        Constant::new("jenni_systole", "Jenni systole", jenni_systole()),
        Constant::new(
            "jenni_systole_acosh",
            "Jenni systole (acosh form)",
            jenni_systole_acosh(),
        ),
        Constant::new("jenni_area", "Jenni area", num(4.0) * pi()),
        Constant::new("jenni", "Jenni", jenni_systole().pow(num(2.0)) / (num(4.0) * pi())),
        Constant::new("g_o", "metric g_O on Bolza", flat_bolza_ratio()),
        Constant::new("cat0_bound", "CAT(0) genus 2 bound", cat0_bound()),
        Constant::new(
            "hyperelliptic_disk_genus2",
            "hyperelliptic disk bound at genus 2",
            num(8.0) / (num(3.0) * pi()),
        ),
        Constant::new("bolza_conformal_bound", "Bolza conformal bound", pi() / num(3.0)),
        Constant::new(
            "bavard_klein_bottle",
            "Bavard Klein bottle bound",
            pi() / num(2.0).pow(num(3.0) / num(2.0)),
        ),
        Constant::new("aut_bolza_order", "order of Aut(Bolza)", num(96.0)),
    ]
}

pub fn constant(key: &str) -> Option<Constant> {
    exact_constants().into_iter().find(|c| c.key == key)
}

/// Truncate (not round) to `digits` decimals, matching how the genus-two
/// table reports 2/3 as 0.6666.
pub fn truncate_decimals(v: f64, digits: u32) -> String {
    let scale = 10f64.powi(digits as i32);
    // Nudge by a few ulps so exact decimal values are not truncated downward.
    let t = (v * scale * (1.0 + 4.0 * f64::EPSILON)).trunc() / scale;
    format!("{t:.*}", digits as usize)
}
