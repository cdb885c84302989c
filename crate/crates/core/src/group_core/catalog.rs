//! Built-in charts, addressable by name.
//!
//! | name | group | chart |
//! |---|---|---|
//! | `R^n:k` | additive Rᵏ | identity coordinates |
//! | `aff1` | Aff(1)⁺ | `(a, b)`, `a > 0` |
//! | `heis3` | Heisenberg H₃ | `(x, y, z)` |
//! | `borel3` | upper-triangular 3×3, positive diagonal | `(a1, a2, a3, x, y, z)` |
//! | `A*B` | direct product | concatenated coordinates |

use std::sync::Arc;

use super::law::{AffineLine, Borel3, Euclidean, Heisenberg, ProductLaw};
use super::{Bound, GroupChart};
use crate::error::{Error, Result};

/// Names shown by the catalog listing.
pub const GROUP_NAMES: &[&str] = &["R^n", "aff1", "heis3", "borel3"];

pub fn group(name: &str) -> Result<GroupChart> {
    let name = name.trim();
    if let Some((l, r)) = name.split_once('*') {
        let (l, r) = (group(l)?, group(r)?);
        let law = ProductLaw { left: l.law().clone(), right: r.law().clone() };
        let mut domain = l.domain().to_vec();
        domain.extend_from_slice(r.domain());
        let mut identity = l.identity().to_vec();
        identity.extend_from_slice(r.identity());
        return GroupChart::new(name, Arc::new(law), domain, identity);
    }
    let rn = name
        .strip_prefix("R^n:")
        .or_else(|| name.strip_prefix("R^"));
    if let Some(k) = rn {
        let k: usize = k.parse().map_err(|_| Error::UnknownGroup(name.into()))?;
        if k == 0 {
            return Err(Error::UnknownGroup(name.into()));
        }
        return GroupChart::new(name, Arc::new(Euclidean(k)), vec![Bound::ANY; k], vec![0.0; k]);
    }
    match name {
        "aff1" => GroupChart::new(
            name,
            Arc::new(AffineLine),
            vec![Bound::POSITIVE, Bound::ANY],
            vec![1.0, 0.0],
        ),
        "heis3" => GroupChart::new(name, Arc::new(Heisenberg), vec![Bound::ANY; 3], vec![0.0; 3]),
        "borel3" => GroupChart::new(
            name,
            Arc::new(Borel3),
            vec![
                Bound::POSITIVE,
                Bound::POSITIVE,
                Bound::POSITIVE,
                Bound::ANY,
                Bound::ANY,
                Bound::ANY,
            ],
            vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        ),
        _ => Err(Error::UnknownGroup(name.into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(group("R^n:3").unwrap().dim(), 3);
        assert_eq!(group("R^2").unwrap().dim(), 2);
        assert_eq!(group("borel3").unwrap().dim(), 6);
        assert_eq!(group("aff1*heis3").unwrap().dim(), 5);
        assert!(matches!(group("so3"), Err(Error::UnknownGroup(_))));
        assert!(group("R^n:0").is_err());
    }
}
