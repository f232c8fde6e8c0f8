//! Self-describing text serialization for trained classifiers.
//!
//! The document is JSON with every float written as a bit-exact hex-float
//! string, so a save/load round trip reproduces the classifier exactly,
//! byte for byte on re-save.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::classify::{DensityRatioClassifier, MaxDepthClassifier, TrainedClass};
use crate::error::{Error, Result};
use crate::hexfloat;
use crate::kde::DepthKde;
use crate::lp::LpModel;

pub const MODEL_FORMAT: &str = "lpdepth-model";
pub const MODEL_VERSION: u32 = 1;

/// Either of the two classifier kinds, as stored on disk.
#[derive(Debug, Clone)]
pub enum TrainedClassifier {
    MaxDepth(MaxDepthClassifier),
    DensityRatio(DensityRatioClassifier),
}

impl TrainedClassifier {
    pub fn classes(&self) -> &[TrainedClass] {
        match self {
            Self::MaxDepth(c) => c.classes(),
            Self::DensityRatio(c) => c.classes(),
        }
    }

    pub fn dim(&self) -> usize {
        self.classes()[0].model().dim()
    }

    pub fn classify(&self, x: &DVector<f64>) -> Result<usize> {
        match self {
            Self::MaxDepth(c) => c.classify(x),
            Self::DensityRatio(c) => c.classify(x),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format: String,
    version: u32,
    kind: String,
    classes: Vec<ClassDoc>,
    #[serde(default)]
    thresholds: Vec<ThresholdDoc>,
}

#[derive(Serialize, Deserialize)]
struct ClassDoc {
    label: String,
    n: usize,
    prior: String,
    p: String,
    location: Vec<String>,
    /// Row-major d x d transform entries.
    transform: Vec<String>,
    bandwidth: String,
    depth_samples: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ThresholdDoc {
    a: usize,
    b: usize,
    k: String,
}

fn hex(v: f64) -> String {
    hexfloat::format_hex(v)
}

fn unhex(s: &str, what: &str) -> Result<f64> {
    hexfloat::parse_hex(s)
        .ok_or_else(|| Error::ModelFormat(format!("invalid hex float for {what}: '{s}'")))
}

fn class_to_doc(class: &TrainedClass) -> ClassDoc {
    let model = class.model();
    let d = model.dim();
    let mut transform = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            transform.push(hex(model.transform()[(i, j)]));
        }
    }
    ClassDoc {
        label: class.label().to_string(),
        n: class.n(),
        prior: hex(class.prior()),
        p: hex(model.p()),
        location: model.location().iter().map(|&v| hex(v)).collect(),
        transform,
        bandwidth: hex(class.kde().bandwidth()),
        depth_samples: class.kde().samples().iter().map(|&v| hex(v)).collect(),
    }
}

fn class_from_doc(doc: &ClassDoc) -> Result<TrainedClass> {
    let d = doc.location.len();
    if doc.transform.len() != d * d {
        return Err(Error::ModelFormat(format!(
            "class '{}': transform has {} entries for dimension {d}",
            doc.label,
            doc.transform.len()
        )));
    }
    let location = DVector::from_iterator(
        d,
        doc.location
            .iter()
            .map(|s| unhex(s, "location"))
            .collect::<Result<Vec<_>>>()?,
    );
    let entries = doc
        .transform
        .iter()
        .map(|s| unhex(s, "transform"))
        .collect::<Result<Vec<_>>>()?;
    let transform = DMatrix::from_fn(d, d, |i, j| entries[i * d + j]);
    let model = LpModel::new(unhex(&doc.p, "p")?, location, transform)?;
    let samples = doc
        .depth_samples
        .iter()
        .map(|s| unhex(s, "depth sample"))
        .collect::<Result<Vec<_>>>()?;
    let kde = DepthKde::with_bandwidth(&samples, unhex(&doc.bandwidth, "bandwidth")?)?;
    TrainedClass::new(doc.label.clone(), model, kde, unhex(&doc.prior, "prior")?, doc.n)
}

/// Serializes a classifier to the structured text document.
pub fn write_classifier<W: Write>(mut writer: W, classifier: &TrainedClassifier) -> Result<()> {
    let (kind, classes, thresholds) = match classifier {
        TrainedClassifier::MaxDepth(c) => (
            "max-depth".to_string(),
            c.classes().iter().map(class_to_doc).collect(),
            Vec::new(),
        ),
        TrainedClassifier::DensityRatio(c) => (
            "density-ratio".to_string(),
            c.classes().iter().map(class_to_doc).collect(),
            c.thresholds()
                .iter()
                .map(|(&(a, b), &k)| ThresholdDoc { a, b, k: hex(k) })
                .collect(),
        ),
    };
    let doc = ModelDoc {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        kind,
        classes,
        thresholds,
    };
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::ModelFormat(format!("serialization failed: {e}")))?;
    writer.write_all(text.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Reads a classifier back from the structured text document.
pub fn read_classifier<R: Read>(reader: R) -> Result<TrainedClassifier> {
    let doc: ModelDoc = serde_json::from_reader(reader)
        .map_err(|e| Error::ModelFormat(format!("not a readable model document: {e}")))?;
    if doc.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unexpected document format '{}'",
            doc.format
        )));
    }
    if doc.version != MODEL_VERSION {
        return Err(Error::ModelVersion {
            expected: MODEL_VERSION,
            got: doc.version,
        });
    }
    let classes = doc
        .classes
        .iter()
        .map(class_from_doc)
        .collect::<Result<Vec<_>>>()?;
    match doc.kind.as_str() {
        "max-depth" => {
            let p = classes
                .first()
                .map(|c| c.model().p())
                .ok_or_else(|| Error::ModelFormat("no classes in document".into()))?;
            Ok(TrainedClassifier::MaxDepth(MaxDepthClassifier::new(
                classes, p,
            )?))
        }
        "density-ratio" => {
            let mut thresholds = BTreeMap::new();
            for t in &doc.thresholds {
                thresholds.insert((t.a, t.b), unhex(&t.k, "threshold")?);
            }
            Ok(TrainedClassifier::DensityRatio(
                DensityRatioClassifier::new(classes, thresholds)?,
            ))
        }
        other => Err(Error::ModelFormat(format!(
            "unknown classifier kind '{other}'"
        ))),
    }
}

pub fn save_classifier(path: &Path, classifier: &TrainedClassifier) -> Result<()> {
    let file = File::create(path)?;
    write_classifier(BufWriter::new(file), classifier)
}

pub fn load_classifier(path: &Path) -> Result<TrainedClassifier> {
    let file = File::open(path)?;
    read_classifier(BufReader::new(file))
}
