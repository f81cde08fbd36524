use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::numeric::{rpow_ln, ONE, ZERO};

/// Expression tree over constants, `s`, `b^s` for real `b > 0`, sums,
/// products, quotients and integer powers. JSON form carries an `op` tag:
/// `{"op": "div", "num": {"op": "pow", "ln_base": -1.0986}, "den": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Const {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    S,
    /// `exp(s ln_base)`; the base is stored by its logarithm so that n! and
    /// other huge bases stay representable. When the base itself is kept,
    /// real integer exponents are exact powers.
    Pow {
        ln_base: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<f64>,
    },
    Add {
        terms: Vec<Expr>,
    },
    Mul {
        factors: Vec<Expr>,
    },
    Div {
        num: Box<Expr>,
        den: Box<Expr>,
    },
    PowInt {
        base: Box<Expr>,
        exp: i32,
    },
}

impl Expr {
    pub fn c(re: f64) -> Expr {
        Expr::Const { re, im: 0.0 }
    }
    pub fn cz(z: Complex64) -> Expr {
        Expr::Const { re: z.re, im: z.im }
    }
    /// base^s
    pub fn pow(base: f64) -> Expr {
        Expr::Pow { ln_base: base.ln(), base: Some(base) }
    }
    pub fn add(terms: Vec<Expr>) -> Expr {
        Expr::Add { terms }
    }
    pub fn mul(factors: Vec<Expr>) -> Expr {
        Expr::Mul { factors }
    }
    pub fn div(num: Expr, den: Expr) -> Expr {
        Expr::Div {
            num: Box::new(num),
            den: Box::new(den),
        }
    }
    pub fn powi(base: Expr, exp: i32) -> Expr {
        Expr::PowInt {
            base: Box::new(base),
            exp,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const { re, im } if *re == 1.0 && *im == 0.0)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        match self {
            Expr::Const { re, im } => Complex64::new(*re, *im),
            Expr::S => s,
            Expr::Pow { ln_base, base } => match base {
                Some(b) if s.im == 0.0 && s.re.fract() == 0.0 && s.re.abs() <= 64.0 => {
                    Complex64::new(b.powi(s.re as i32), 0.0)
                }
                _ => rpow_ln(*ln_base, s),
            },
            Expr::Add { terms } => terms.iter().fold(ZERO, |a, t| a + t.eval(s)),
            Expr::Mul { factors } => factors.iter().fold(ONE, |a, t| a * t.eval(s)),
            Expr::Div { num, den } => num.eval(s) / den.eval(s),
            Expr::PowInt { base, exp } => base.eval(s).powi(*exp),
        }
    }

    /// The expression with `s` replaced by `s - d`.
    pub fn shift(&self, d: f64) -> Expr {
        if d == 0.0 {
            return self.clone();
        }
        match self {
            Expr::Const { .. } => self.clone(),
            Expr::S => Expr::add(vec![Expr::S, Expr::c(-d)]),
            // b^{s-d} = b^{-d} b^s
            Expr::Pow { ln_base, .. } => Expr::mul(vec![Expr::c((-d * ln_base).exp()), self.clone()]),
            Expr::Add { terms } => Expr::add(terms.iter().map(|t| t.shift(d)).collect()),
            Expr::Mul { factors } => Expr::mul(factors.iter().map(|t| t.shift(d)).collect()),
            Expr::Div { num, den } => Expr::div(num.shift(d), den.shift(d)),
            Expr::PowInt { base, exp } => Expr::powi(base.shift(d), *exp),
        }
    }
}

/// 1 - sum_j count_j r_j^s for grouped ratios.
pub(crate) fn moran_denominator(ratios: &[(f64, f64)]) -> Expr {
    let mut terms = vec![Expr::c(1.0)];
    for &(r, c) in ratios {
        terms.push(Expr::mul(vec![Expr::c(-c), Expr::pow(r)]));
    }
    Expr::add(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_substitutes() {
        let e = Expr::div(Expr::pow(3.0), Expr::add(vec![Expr::S, Expr::c(2.0)]));
        let s = Complex64::new(0.7, -1.3);
        let want = e.eval(s - 1.5);
        assert!((e.shift(1.5).eval(s) - want).norm() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let e = Expr::powi(Expr::S, -2);
        let j = serde_json::to_string(&e).unwrap();
        assert_eq!(j, r#"{"op":"pow_int","base":{"op":"s"},"exp":-2}"#);
        let back: Expr = serde_json::from_str(&j).unwrap();
        assert_eq!(back, e);
        let c: Expr = serde_json::from_str(r#"{"op":"const","re":2.5}"#).unwrap();
        assert_eq!(c, Expr::c(2.5));
    }
}
