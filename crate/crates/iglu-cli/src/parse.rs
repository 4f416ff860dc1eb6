//! Activation tokens used by every subcommand:
//!
//! `identity | relu | gelu | gelu-tanh | gelu-a:<a> | silu | mish |
//!  hardswish | iglu[:<sigma>] | iglu-approx[:<sigma>]`
//!
//! A sigma of `learnable` (optionally `learnable:<init>`, default init 1)
//! makes the sharpness trainable. Bare `iglu` / `iglu-approx` default to
//! `sigma = 1`.

use anyhow::{bail, Result};
use iglu_core::{Activation, Sharpness};

pub fn parse_activation(token: &str) -> Result<Activation> {
    let token = token.trim();
    let (name, arg) = match token.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (token, None),
    };
    let act = match (name, arg) {
        ("identity", None) => Activation::Identity,
        ("relu", None) => Activation::Relu,
        ("gelu", None) => Activation::GeluExact,
        ("gelu-tanh", None) => Activation::GeluTanh,
        ("gelu-a", Some(a)) => {
            let a: f64 = a.parse()?;
            if !(a.is_finite() && a >= 0.0) {
                bail!("gelu-a needs a finite a >= 0, got {a}");
            }
            Activation::GeluA { a }
        }
        ("silu", None) => Activation::Silu,
        ("mish", None) => Activation::Mish,
        ("hardswish", None) => Activation::Hardswish,
        ("iglu", arg) => Activation::Iglu { sigma: parse_sigma(arg)? },
        ("iglu-approx", arg) => Activation::IgluApprox { sigma: parse_sigma(arg)? },
        _ => bail!(
            "unknown activation `{token}`; expected one of identity, relu, gelu, gelu-tanh, \
             gelu-a:<a>, silu, mish, hardswish, iglu[:<sigma>|:learnable[:<init>]], \
             iglu-approx[:<sigma>|:learnable[:<init>]]"
        ),
    };
    Ok(act)
}

fn parse_sigma(arg: Option<&str>) -> Result<Sharpness> {
    match arg {
        None => Ok(Sharpness::fixed(1.0)),
        Some("learnable") => Ok(Sharpness::learnable(1.0)),
        Some(rest) => {
            if let Some(init) = rest.strip_prefix("learnable:") {
                let init: f64 = init.parse()?;
                if !(init.is_finite() && init > 0.0) {
                    bail!("learnable sigma init must be > 0, got {init}");
                }
                Ok(Sharpness::learnable(init))
            } else {
                let v: f64 = rest.parse()?;
                if !(v.is_finite() && v >= 0.0) {
                    bail!("sigma must be finite and >= 0, got {v}");
                }
                Ok(Sharpness::fixed(v))
            }
        }
    }
}

/// Comma-separated activation list.
pub fn parse_zoo(list: &str) -> Result<Vec<Activation>> {
    list.split(',').filter(|t| !t.trim().is_empty()).map(parse_activation).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_roundtrip() {
        assert_eq!(parse_activation("relu").unwrap(), Activation::Relu);
        assert_eq!(
            parse_activation("iglu:0.5").unwrap(),
            Activation::Iglu { sigma: Sharpness::fixed(0.5) }
        );
        assert_eq!(
            parse_activation("iglu").unwrap(),
            Activation::Iglu { sigma: Sharpness::fixed(1.0) }
        );
        assert_eq!(parse_activation("gelu-a:2").unwrap(), Activation::GeluA { a: 2.0 });
        assert!(matches!(
            parse_activation("iglu-approx:learnable:0.7").unwrap(),
            Activation::IgluApprox { sigma } if sigma.is_learnable()
        ));
    }

    #[test]
    fn bad_tokens_are_rejected() {
        assert!(parse_activation("softsign").is_err());
        assert!(parse_activation("iglu:-1").is_err());
        assert!(parse_activation("gelu-a:-0.5").is_err());
        assert!(parse_activation("relu:2").is_err());
        assert!(parse_activation("iglu:learnable:0").is_err());
    }

    #[test]
    fn zoo_lists_parse_in_order() {
        let zoo = parse_zoo("identity, relu,iglu:1").unwrap();
        assert_eq!(zoo.len(), 3);
        assert_eq!(zoo[0], Activation::Identity);
        assert!(parse_zoo("relu,bogus").is_err());
    }
}
