//! Position specs such as `(i,i+x,i+2x)`: spins at a base site `i` plus
//! integer multiples of a separation `x`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::Boundary;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionSpec {
    /// Multiples of `x`, strictly increasing and starting at 0.
    coefficients: Vec<usize>,
}

/// All position tuples of one separation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationGroup {
    pub x: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl PositionSpec {
    pub fn new(coefficients: Vec<usize>) -> Result<Self> {
        let spec = PositionSpec { coefficients };
        if spec.coefficients.first() != Some(&0)
            || spec.coefficients.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::PositionSpec {
                spec: spec.to_string(),
                reason: "multiples of x must start at 0 and increase".into(),
            });
        }
        Ok(spec)
    }

    pub fn pair() -> Self {
        PositionSpec {
            coefficients: vec![0, 1],
        }
    }

    pub fn triple() -> Self {
        PositionSpec {
            coefficients: vec![0, 1, 2],
        }
    }

    pub fn quadruple() -> Self {
        PositionSpec {
            coefficients: vec![0, 1, 2, 3],
        }
    }

    pub fn n_spins(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[usize] {
        &self.coefficients
    }

    fn span(&self) -> usize {
        *self.coefficients.last().expect("non-empty")
    }

    /// Largest separation that fits: `span * x <= L - 1` for open chains,
    /// `(span + 1) * x <= L` for periodic ones.
    pub fn max_separation(&self, n_sites: usize, boundary: Boundary) -> usize {
        let span = self.span();
        if span == 0 {
            return 0;
        }
        match boundary {
            Boundary::Open => (n_sites - 1) / span,
            Boundary::Periodic => n_sites / (span + 1),
        }
    }

    /// Sites for base `i` and separation `x`, wrapped under periodic boundaries.
    pub fn sites(&self, i: usize, x: usize, n_sites: usize) -> Vec<usize> {
        self.coefficients
            .iter()
            .map(|c| (i + c * x) % n_sites)
            .collect()
    }

    /// Every admissible tuple grouped by separation: all base sites under
    /// periodic boundaries, those that keep the tuple inside the chain
    /// otherwise. `only` restricts the separations.
    pub fn enumerate(
        &self,
        n_sites: usize,
        boundary: Boundary,
        only: Option<&[usize]>,
    ) -> Result<Vec<SeparationGroup>> {
        let max = self.max_separation(n_sites, boundary);
        if let Some(xs) = only {
            if let Some(&bad) = xs.iter().find(|&&x| x == 0 || x > max) {
                return Err(Error::PositionSpec {
                    spec: self.to_string(),
                    reason: format!("separation {bad} outside 1..={max} for {n_sites} sites"),
                });
            }
        }
        let groups = (1..=max)
            .filter(|x| only.map_or(true, |xs| xs.contains(x)))
            .map(|x| {
                let bases = match boundary {
                    Boundary::Open => n_sites - self.span() * x,
                    Boundary::Periodic => n_sites,
                };
                SeparationGroup {
                    x,
                    tuples: (0..bases).map(|i| self.sites(i, x, n_sites)).collect(),
                }
            })
            .collect();
        Ok(groups)
    }
}

impl fmt::Display for PositionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coefficients
            .iter()
            .map(|&c| match c {
                0 => "i".to_string(),
                1 => "i+x".to_string(),
                c => format!("i+{c}x"),
            })
            .collect();
        write!(f, "({})", terms.join(","))
    }
}

impl FromStr for PositionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::PositionSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| bad("expected a parenthesized list"))?;
        let coefficients = inner
            .split(',')
            .map(|term| {
                if term == "i" {
                    return Ok(0);
                }
                let mult = term
                    .strip_prefix("i+")
                    .and_then(|r| r.strip_suffix('x'))
                    .ok_or_else(|| bad("terms look like i, i+x or i+2x"))?;
                if mult.is_empty() {
                    Ok(1)
                } else {
                    mult.trim_end_matches('*')
                        .parse::<usize>()
                        .map_err(|_| bad("bad multiple of x"))
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        PositionSpec::new(coefficients)
            .map_err(|_| bad("multiples of x must start at 0 and increase"))
    }
}

impl Serialize for PositionSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PositionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
