//! The persisted region: reference sample, plan and threshold as canonical
//! JSON.
//!
//! Keys are written in declaration order and every float with 17
//! significant digits, so loading and saving again gives the same bytes.

use std::io;
use std::path::Path;

use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, Serializer};

use mvspacings::depth::DepthKind;
use mvspacings::tolerance::{plan_region, ToleranceKind, ToleranceRegion, ToleranceSpec};
use mvspacings::Dataset;

use crate::CliError;

pub const MODEL_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecRecord {
    pub beta: f64,
    pub gamma: Option<f64>,
    pub kind: String,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitMeta {
    /// Recorded for provenance; fitting draws no random numbers.
    pub seed: u64,
    /// File name of the training CSV.
    pub input: String,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: String,
    pub depth: String,
    pub spec: SpecRecord,
    pub n: usize,
    pub dim: usize,
    pub r_n: usize,
    pub threshold: f64,
    pub reference: Vec<Vec<f64>>,
    pub hull: Option<Vec<[f64; 2]>>,
    pub meta: FitMeta,
}

/// Compact JSON with floats in `{:.16e}` form.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

impl ModelFile {
    pub fn from_region(region: &ToleranceRegion, seed: u64, input: &str) -> Self {
        let plan = region.plan();
        let reference = region.reference();
        Self {
            version: MODEL_VERSION.to_string(),
            depth: region.kind().tag().to_string(),
            spec: SpecRecord {
                beta: plan.spec.beta,
                gamma: plan.spec.gamma,
                kind: plan.spec.kind.tag().to_string(),
            },
            n: reference.len(),
            dim: reference.dim(),
            r_n: plan.r_n,
            threshold: region.threshold(),
            reference: reference.rows().map(<[f64]>::to_vec).collect(),
            hull: region.hull().map(|h| h.vertices().to_vec()),
            meta: FitMeta {
                seed,
                input: input.to_string(),
            },
        }
    }

    /// Canonical text, newline terminated.
    pub fn to_canonical_json(&self) -> String {
        let mut buf = Vec::new();
        let mut ser = Serializer::with_formatter(&mut buf, FixedFloats);
        self.serialize(&mut ser).expect("model serializes");
        buf.push(b'\n');
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let version: VersionProbe =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("model file is not valid JSON: {e}")))?;
        if version.version != MODEL_VERSION {
            return Err(CliError::Input(format!(
                "model version '{}' is not supported (expected '{MODEL_VERSION}')",
                version.version
            )));
        }
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed model file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_canonical_json())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
    }

    pub fn tolerance_spec(&self) -> Result<ToleranceSpec, CliError> {
        let kind = ToleranceKind::from_tag(&self.spec.kind)?;
        let spec = match (kind, self.spec.gamma) {
            (ToleranceKind::Content, Some(g)) => ToleranceSpec::content(self.spec.beta, g)?,
            (ToleranceKind::Content, None) => {
                return Err(CliError::Input("content model without gamma".into()));
            }
            (ToleranceKind::Expectation, _) => ToleranceSpec::expectation(self.spec.beta)?,
        };
        Ok(spec)
    }

    /// Rebuilds the region, re-deriving `r_n`, the threshold and the hull
    /// from the reference sample.
    pub fn to_region(&self) -> Result<ToleranceRegion, CliError> {
        let reference = Dataset::from_rows(&self.reference)?;
        if reference.len() != self.n || reference.dim() != self.dim {
            return Err(CliError::Input(format!(
                "model declares n={} p={} but stores {} points of dimension {}",
                self.n,
                self.dim,
                reference.len(),
                reference.dim()
            )));
        }
        let kind = DepthKind::from_tag(&self.depth)?;
        let plan = plan_region(self.n, &self.tolerance_spec()?)?;
        if plan.r_n != self.r_n {
            return Err(CliError::Input(format!(
                "model r_n={} does not match the planned r_n={}",
                self.r_n, plan.r_n
            )));
        }
        let region = ToleranceRegion::from_parts(reference, kind, plan, self.threshold)?;
        let hull = region.hull().map(|h| h.vertices().to_vec());
        if hull != self.hull {
            return Err(CliError::Input("stored hull does not match the retained points".into()));
        }
        Ok(region)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    version: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use mvspacings::tolerance::fit_region;

    fn square_region() -> ToleranceRegion {
        let data = Dataset::from_rows(&[
            [0.0, 0.0],
            [2.0, 0.0],
            [0.0, 2.0],
            [2.0, 2.0],
            [1.0, 1.0],
            [0.7, 1.3],
            [1.6, 0.4],
        ])
        .unwrap();
        fit_region(&data, &ToleranceSpec::expectation(0.7).unwrap(), DepthKind::Simplicial).unwrap()
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let model = ModelFile::from_region(&square_region(), 3, "sq.csv");
        let text = model.to_canonical_json();
        assert!(text.starts_with("{\"version\":\"1\",\"depth\":\"simplicial\",\"spec\":{\"beta\":6.9999999999999996e-1"));
        assert!(text.contains("\"reference\":[[0.0000000000000000e0,0.0000000000000000e0]"));
        assert!(text.ends_with("\"meta\":{\"seed\":3,\"input\":\"sq.csv\"}}\n"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let model = ModelFile::from_region(&square_region(), 0, "sq.csv");
        let text = model.to_canonical_json();
        let back = ModelFile::parse(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_canonical_json(), text);
        let region = back.to_region().unwrap();
        assert_eq!(region.retained(), square_region().retained());
    }

    #[test]
    fn awkward_floats_parse_back_exactly() {
        let mut model = ModelFile::from_region(&square_region(), 0, "sq.csv");
        let mut x = 0.1234567_f64;
        model.reference = (0..200)
            .map(|_| {
                x = (x * 7919.0 + 0.3).fract();
                vec![x * 1e3 - 500.0, (1.0 - x).ln()]
            })
            .collect();
        let text = model.to_canonical_json();
        let back = ModelFile::parse(&text).unwrap();
        for (a, b) in model.reference.iter().zip(&back.reference) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
        assert_eq!(back.to_canonical_json(), text);
    }

    #[test]
    fn rejects_other_versions_and_tampering() {
        let model = ModelFile::from_region(&square_region(), 0, "sq.csv");
        let mut v2 = model.clone();
        v2.version = "2".into();
        let err = ModelFile::parse(&v2.to_canonical_json()).unwrap_err();
        assert!(err.to_string().contains("version"));

        let mut moved = model.clone();
        moved.threshold += 1e-9;
        assert!(moved.to_region().is_err());
        let mut wrong_r = model.clone();
        wrong_r.r_n += 1;
        assert!(wrong_r.to_region().is_err());
        let mut extra = model.to_canonical_json();
        extra.insert_str(1, "\"extra\":1,");
        assert!(ModelFile::parse(&extra).is_err());
    }
}
