//! Dataset CSV layout (`iglu.dataset.v1`).
//!
//! ```text
//! schema,iglu.dataset.v1
//! classes,<K>
//! feature_dim,<D>
//! split,<train|test>
//! counts,<n_0>,...,<n_{K-1}>
//! label,x0,...,x{D-1}
//! <label>,<f64>,...           one row per sample
//! ```
//!
//! Floats are written with Rust's shortest-roundtrip formatting, so a
//! write/read cycle is lossless and byte-identical across runs.

use anyhow::{bail, Context, Result};
use iglu_core::{Dataset, Split};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const DATASET_SCHEMA: &str = "iglu.dataset.v1";

/// Serialize one split to the CSV layout.
pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema,{DATASET_SCHEMA}");
    let _ = writeln!(out, "classes,{}", ds.num_classes);
    let _ = writeln!(out, "feature_dim,{}", ds.feature_dim);
    let _ = writeln!(out, "split,{}", ds.split);
    let counts = ds.class_histogram();
    let _ = write!(out, "counts");
    for c in counts {
        let _ = write!(out, ",{c}");
    }
    let _ = writeln!(out);
    let _ = write!(out, "label");
    for d in 0..ds.feature_dim {
        let _ = write!(out, ",x{d}");
    }
    let _ = writeln!(out);
    for i in 0..ds.len() {
        let _ = write!(out, "{}", ds.labels[i]);
        for v in ds.sample(i) {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    fs::write(path, dataset_to_csv(ds))
        .with_context(|| format!("writing dataset to {}", path.display()))
}

/// Write `<prefix>.train.csv` and `<prefix>.test.csv`; returns the paths.
pub fn write_split_pair(
    prefix: &Path,
    train: &Dataset,
    test: &Dataset,
) -> Result<(PathBuf, PathBuf)> {
    let mut train_path = prefix.as_os_str().to_owned();
    train_path.push(".train.csv");
    let mut test_path = prefix.as_os_str().to_owned();
    test_path.push(".test.csv");
    let (train_path, test_path) = (PathBuf::from(train_path), PathBuf::from(test_path));
    write_dataset(&train_path, train)?;
    write_dataset(&test_path, test)?;
    Ok((train_path, test_path))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading dataset from {}", path.display()))?;
    parse_dataset(&text).with_context(|| format!("parsing {}", path.display()))
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.with_context(|| format!("missing {key} header line"))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(','))
        .with_context(|| format!("expected `{key},...`, got `{line}`"))
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut lines = text.lines();
    let schema = header_value(lines.next(), "schema")?;
    if schema != DATASET_SCHEMA {
        bail!("unsupported schema `{schema}` (expected {DATASET_SCHEMA})");
    }
    let num_classes: usize = header_value(lines.next(), "classes")?.parse()?;
    let feature_dim: usize = header_value(lines.next(), "feature_dim")?.parse()?;
    let split = match header_value(lines.next(), "split")? {
        "train" => Split::Train,
        "test" => Split::Test,
        other => bail!("unknown split `{other}`"),
    };
    let counts: Vec<usize> = header_value(lines.next(), "counts")?
        .split(',')
        .map(|c| c.parse().context("bad count"))
        .collect::<Result<_>>()?;
    if counts.len() != num_classes {
        bail!("counts line has {} entries for {} classes", counts.len(), num_classes);
    }
    let _column_header = lines.next().context("missing column header")?;

    let total: usize = counts.iter().sum();
    let mut features = Vec::with_capacity(total * feature_dim);
    let mut labels = Vec::with_capacity(total);
    for (row_idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label: usize = fields
            .next()
            .context("empty row")?
            .parse()
            .with_context(|| format!("bad label in row {row_idx}"))?;
        if label >= num_classes {
            bail!("label {label} out of range in row {row_idx}");
        }
        labels.push(label);
        let mut got = 0;
        for field in fields {
            let v: f64 =
                field.parse().with_context(|| format!("bad feature in row {row_idx}"))?;
            if !v.is_finite() {
                bail!("non-finite feature in row {row_idx}");
            }
            features.push(v);
            got += 1;
        }
        if got != feature_dim {
            bail!("row {row_idx} has {got} features, expected {feature_dim}");
        }
    }

    let ds = Dataset { num_classes, feature_dim, features, labels, split };
    if ds.class_histogram() != counts {
        bail!("counts header does not match the row labels");
    }
    Ok(ds)
}
