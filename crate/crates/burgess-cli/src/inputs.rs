//! Parsing of command-line value syntaxes: integer lists, boxes,
//! collections, exponent sets and exact rationals.

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use burgess_core::charsum::{BoxRegion, Collection};
use burgess_core::poly::{Monomial, MonomialSystem};

pub fn parse_u64_list(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|t| t.trim().parse::<u64>().context("expected a comma-separated list of integers"))
        .collect()
}

pub fn parse_i64_list(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|t| t.trim().parse::<i64>().context("expected a comma-separated list of integers"))
        .collect()
}

/// Box syntax: `N1,...,Nn;H1,...,Hn` (offsets, then sides).
pub fn parse_box(text: &str) -> Result<BoxRegion> {
    let (offset, sides) = text
        .split_once(';')
        .ok_or_else(|| anyhow!("box syntax is `N1,..,Nn;H1,..,Hn`"))?;
    BoxRegion::new(parse_i64_list(offset)?, parse_u64_list(sides)?).map_err(Into::into)
}

/// Collection syntax: points separated by `;`, coordinates by `,`:
/// `1,1;2,1;2,2;1,2`.
pub fn parse_collection(text: &str) -> Result<Collection> {
    let points = text
        .split(';')
        .map(parse_i64_list)
        .collect::<Result<Vec<_>>>()?;
    Collection::new(points).map_err(Into::into)
}

/// Exponent-set syntax: multi-indices separated by `|`, entries by `,`:
/// `1,0|0,1|1,1`.
pub fn parse_lambda(text: &str) -> Result<Vec<Monomial>> {
    text.split('|')
        .map(|m| {
            let entries = m
                .trim()
                .split(',')
                .map(|t| t.trim().parse::<u32>().context("multi-index entry"))
                .collect::<Result<Vec<_>>>()?;
            Ok(Monomial(entries))
        })
        .collect()
}

/// A system descriptor resolved from `--standard`, `--ack` or `--custom`.
pub fn resolve_system(
    standard: &Option<Vec<u64>>,
    ack: &Option<Vec<String>>,
    custom: &Option<Vec<String>>,
) -> Result<MonomialSystem> {
    match (standard, ack, custom) {
        (Some(nd), None, None) => {
            if nd.len() != 2 {
                bail!("--standard takes N and D");
            }
            Ok(MonomialSystem::standard(nd[0] as usize, nd[1] as u32)?)
        }
        (None, Some(parts), None) => {
            if parts.len() != 2 {
                bail!("--ack takes CAPS (comma-separated) and K");
            }
            let caps: Vec<u32> = parse_u64_list(&parts[0])?.iter().map(|&c| c as u32).collect();
            let k: u32 = parts[1].trim().parse().context("total cap K")?;
            Ok(MonomialSystem::ack(&caps, k)?)
        }
        (None, None, Some(parts)) => {
            if parts.len() != 2 {
                bail!("--custom takes N and the exponent set");
            }
            let n: usize = parts[0].trim().parse().context("dimension N")?;
            Ok(MonomialSystem::custom_relaxed(n, parse_lambda(&parts[1])?)?)
        }
        (None, None, None) => bail!("one of --standard/--ack/--custom is required"),
        _ => bail!("give exactly one of --standard/--ack/--custom"),
    }
}

/// Exact rational from `p/q` or a decimal literal like `0.02`.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().context("numerator")?;
        let q: BigInt = q.trim().parse().context("denominator")?;
        if q == BigInt::from(0) {
            bail!("zero denominator");
        }
        return Ok(BigRational::new(p, q));
    }
    match text.split_once('.') {
        None => {
            let p: BigInt = text.parse().context("integer literal")?;
            Ok(BigRational::from(p))
        }
        Some((whole, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                bail!("malformed decimal literal {text:?}");
            }
            let negative = whole.trim_start().starts_with('-');
            let whole_part: BigInt = if whole.is_empty() || whole == "-" {
                BigInt::from(0)
            } else {
                whole.parse().context("decimal literal")?
            };
            let mut den = BigInt::one();
            for _ in 0..frac.len() {
                den *= 10;
            }
            let frac_part: BigInt = frac.parse().context("decimal fraction digits")?;
            let magnitude = whole_part.magnitude().clone() * den.magnitude().clone()
                + frac_part.magnitude().clone();
            let num = BigInt::from_biguint(
                if negative {
                    num_bigint::Sign::Minus
                } else {
                    num_bigint::Sign::Plus
                },
                magnitude,
            );
            Ok(BigRational::new(num, den))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.02").unwrap(), BigRational::new(1.into(), 50.into()));
        assert_eq!(parse_rational("1/50").unwrap(), BigRational::new(1.into(), 50.into()));
        assert_eq!(parse_rational("-0.5").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("3").unwrap(), BigRational::from(BigInt::from(3)));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.x2").is_err());
    }

    #[test]
    fn boxes_and_collections() {
        let b = parse_box("0,0;5,5").unwrap();
        assert_eq!(b.volume(), 25);
        let c = parse_collection("1,1;2,1;2,2;1,2").unwrap();
        assert_eq!(c.r(), 2);
        assert!(parse_collection("1,1;2").is_err());
    }
}
