//! TOML description of a nested model sequence.
//!
//! ```toml
//! [model]
//! location_prior = "uniform"          # or "shifted_binomial" (one change point)
//!
//! [[segment]]
//! family = "weibull"
//! priors = ["gamma:1.5,1", "gamma:5,1"]
//!
//! [[segment]]
//! family = "lognormal"
//! priors = ["normal:0.05,1", "gamma:16,1"]
//!
//! [mc]                                # optional
//! draws = 5000
//! seed = 12345
//! ```
//!
//! Segment s (1-based) is the density after the (s−1)-th change point, so M_j
//! uses the first j+1 segments. Parameter priors are distribution literals
//! (`gamma:1.5,1`), shifted literals (`2+poisson:30`) or point masses
//! (`fixed:10`). Parameters are ordered as in the family's constructor:
//! Gamma(shape, rate), Weibull(scale, shape), LogNormal(μ, precision),
//! Normal(μ, σ), Beta(a, b).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::model_priors::{LocationPriorKind, NestedModelSequence, ParamPrior, SegmentPrior};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub model: ModelSection,
    pub segment: Vec<SegmentSection>,
    #[serde(default)]
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default)]
    pub location_prior: LocationPriorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub family: String,
    pub priors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub draws: Option<usize>,
    pub seed: Option<u64>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("model config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Validated model sequence.
    pub fn sequence(&self) -> Result<NestedModelSequence> {
        let segments = self
            .segment
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let ctx = |e: Error| Error::Parse(format!("segment {}: {e}", i + 1));
                let family: Family = s.family.parse().map_err(ctx)?;
                let priors = s.priors.iter().map(|p| p.parse::<ParamPrior>()).collect::<Result<Vec<_>>>().map_err(ctx)?;
                SegmentPrior::new(family, priors).map_err(ctx)
            })
            .collect::<Result<Vec<_>>>()?;
        if segments.len() < 2 {
            return Err(Error::Parse("model config: need at least two [[segment]] tables".into()));
        }
        NestedModelSequence::new(segments, self.model.location_prior)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scenario_two() {
        let f = ModelFile::parse(
            r#"
            [model]
            location_prior = "uniform"
            [[segment]]
            family = "weibull"
            priors = ["gamma:1.5,1", "gamma:5,1"]
            [[segment]]
            family = "lognormal"
            priors = ["normal:0.05,1", "gamma:16,1"]
            [[segment]]
            family = "gamma"
            priors = ["gamma:10,1", "gamma:0.2,0.1"]
            "#,
        )
        .unwrap();
        let s = f.sequence().unwrap();
        assert_eq!(s.max_changes(), 2);
        assert_eq!(s.families(), vec![Family::Weibull, Family::LogNormal, Family::Gamma]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ModelFile::parse("[[segment]]\nfamily = \"poisson\"\npriors = [\"gamma:1,1\"]\ncolour = 1").is_err());
        let f = ModelFile::parse("[[segment]]\nfamily = \"poisson\"\npriors = [\"gamma:1,1\", \"gamma:1,1\"]\n[[segment]]\nfamily = \"poisson\"\npriors = [\"gamma:1,1\"]").unwrap();
        let e = f.sequence().unwrap_err();
        assert!(e.to_string().contains("segment 1"), "{e}");
        let f = ModelFile::parse("[[segment]]\nfamily = \"poisson\"\npriors = [\"gamma:1,1\"]").unwrap();
        assert!(f.sequence().is_err());
    }
}
