//! Text forms accepted on the command line.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use universality_lab::runge_engine::PoleSpec;
use universality_lab::symbol_dynamics::{HolomorphicMap, SymbolSpec};

fn real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() { Ok(v) } else { Err(format!("not finite: {s:?}")) }
}

/// `re,im` or a bare real.
pub fn complex(s: &str) -> Result<Complex64, String> {
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(real(re)?, real(im)?)),
        None => Ok(Complex64::new(real(s)?, 0.0)),
    }
}

/// Semicolon separated complex list, e.g. `0,0;0.5,0;1,0`.
pub fn complex_list(s: &str) -> Result<Vec<Complex64>, String> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(';').map(complex).collect()
}

/// A whole coefficient list given as one flag value.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CoeffList(pub Vec<Complex64>);

pub fn coeff_list(s: &str) -> Result<CoeffList, String> {
    complex_list(s).map(CoeffList)
}

/// `re,im:order`.
pub fn pole(s: &str) -> Result<PoleSpec, String> {
    let (at, order) = s.rsplit_once(':').ok_or_else(|| format!("expected re,im:order, got {s:?}"))?;
    let max_order = order.trim().parse().map_err(|_| format!("bad pole order {order:?}"))?;
    Ok(PoleSpec { location: complex(at)?, max_order })
}

/// `blaschke:a`, `blaschke:re,im`, `poly:c0;c1;…` or `rational:n0;n1;…/d0;d1;…`.
pub fn symbol(s: &str) -> Result<SymbolSpec, String> {
    let (kind, rest) = s.split_once(':').ok_or_else(|| format!("expected kind:parameters, got {s:?}"))?;
    match kind.trim() {
        "blaschke" => Ok(SymbolSpec::Blaschke { alpha: complex(rest)? }),
        "poly" | "polynomial" => Ok(SymbolSpec::Polynomial { coeffs: complex_list(rest)? }),
        "rational" => {
            let (num, den) = rest.split_once('/').ok_or("rational symbol needs num/den")?;
            Ok(SymbolSpec::Rational { num: complex_list(num)?, den: complex_list(den)? })
        }
        other => Err(format!("unknown symbol kind {other:?}")),
    }
}

/// A symbol given either as text or as a JSON spec object. It always
/// serializes as the object.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol(pub SymbolSpec);

impl Symbol {
    pub fn blaschke(alpha: f64) -> Self {
        Symbol(SymbolSpec::Blaschke { alpha: Complex64::new(alpha, 0.0) })
    }

    pub fn map(&self) -> universality_lab::Result<HolomorphicMap> {
        HolomorphicMap::new(self.0.clone())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Form {
            Text(String),
            Spec(SymbolSpec),
        }
        match Form::deserialize(d)? {
            Form::Text(t) => symbol(&t).map(Symbol).map_err(serde::de::Error::custom),
            Form::Spec(s) => Ok(Symbol(s)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.1,0.0").unwrap(), Complex64::new(0.1, 0.0));
        assert_eq!(complex(" -2 , 3e-1").unwrap(), Complex64::new(-2.0, 0.3));
        assert_eq!(complex("0.6").unwrap(), Complex64::new(0.6, 0.0));
        assert!(complex("1,x").is_err());
        assert!(complex("nan").is_err());
        assert_eq!(complex_list("0,0;0.5,0;1,0").unwrap().len(), 3);
    }

    #[test]
    fn symbol_forms() {
        assert_eq!(symbol("blaschke:0.6").unwrap(), SymbolSpec::Blaschke { alpha: Complex64::new(0.6, 0.0) });
        assert_eq!(
            symbol("poly:0;0.5;1").unwrap(),
            SymbolSpec::Polynomial { coeffs: vec![0.0.into(), 0.5.into(), 1.0.into()] }
        );
        assert!(matches!(symbol("rational:0;1/1;1").unwrap(), SymbolSpec::Rational { .. }));
        assert!(symbol("exp:1").is_err());
        assert!(symbol("blaschke").is_err());
    }

    #[test]
    fn symbol_json_accepts_text_and_object() {
        let a: Symbol = serde_json::from_str(r#""blaschke:0.6""#).unwrap();
        let b: Symbol = serde_json::from_str(r#"{"kind":"blaschke","alpha":[0.6,0.0]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"kind":"blaschke","alpha":[0.6,0.0]}"#);
    }

    #[test]
    fn pole_form() {
        let p = pole("0,0:3").unwrap();
        assert_eq!(p.max_order, 3);
        assert!(pole("0,0").is_err());
    }
}
