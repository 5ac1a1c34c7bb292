//! Text formats for domains.
//!
//! ```toml
//! dim = 2
//! lower = [0, 0]
//! upper = [2, 2]
//! gamma = [[1, 2, 0]]   # x_1 - x_2 <= 0, 1-based indices
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ConstraintSystem, LNatDomain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub dim: usize,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    #[serde(default)]
    pub gamma: Vec<[i64; 3]>,
}

impl DomainFile {
    pub fn from_domain(domain: &LNatDomain) -> Self {
        let gamma = domain.system().differences().map(|(i, j, g)| [i as i64 + 1, j as i64 + 1, g]).collect();
        Self { dim: domain.dim(), lower: domain.lower().to_vec(), upper: domain.upper().to_vec(), gamma }
    }

    pub fn build(&self) -> Result<LNatDomain> {
        if self.lower.len() != self.dim || self.upper.len() != self.dim {
            return Err(Error::Parse(format!("lower and upper need {} entries", self.dim)));
        }
        let mut sys = ConstraintSystem::new(self.lower.clone(), self.upper.clone())?;
        for &[i, j, g] in &self.gamma {
            let in_range = |k: i64| k >= 1 && k <= self.dim as i64;
            if !in_range(i) || !in_range(j) {
                return Err(Error::Parse(format!("gamma index ({i}, {j}) outside 1..={}", self.dim)));
            }
            sys.add_difference(i as usize - 1, j as usize - 1, g)?;
        }
        LNatDomain::new(sys)
    }
}

pub fn parse_domain(text: &str) -> Result<LNatDomain> {
    let file: DomainFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.build()
}

pub fn domain_to_toml(domain: &LNatDomain) -> String {
    toml::to_string(&DomainFile::from_domain(domain)).expect("domain files always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let k = parse_domain("dim = 2\nlower = [0, 0]\nupper = [2, 2]\ngamma = [[1, 2, 0]]\n").unwrap();
        assert_eq!(k.gamma(0, 1), Some(0));
        assert_eq!(k.gamma(1, 0), None);
        assert_eq!(parse_domain(&domain_to_toml(&k)).unwrap(), k);
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_domain("dim = 2\nlower = [0]\nupper = [2, 2]").is_err());
        assert!(parse_domain("dim = 1\nlower = [0]\nupper = [2]\ngamma = [[1, 2, 0]]").is_err());
        assert!(parse_domain("dim = 1\nlower = [0]\nupper = [2]\nextra = 1").is_err());
        assert!(matches!(parse_domain("dim = 2\nlower = [0, 0]\nupper = [0, 2]"), Err(Error::NotFullDimensional(_))));
    }
}
