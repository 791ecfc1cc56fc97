//! JSON instance files and number formatting.
//!
//! Complex entries are `[re, im]`, matrices are row-major arrays of rows and
//! every float is written with 17 significant digits, so a parse followed by
//! a write reproduces canonical files byte for byte.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use usd_cbs::operator::CMatrix;
use usd_cbs::reductions::{validate_pair, WeightedState};
use usd_cbs::{HermitianOperator, Tolerances};

use crate::CliError;

pub const INSTANCE_FORMAT: &str = "usd-cbs-instance";
pub const INSTANCE_VERSION: u32 = 1;

/// Pretty JSON with floats in `d.dddddddddddddddde±x` notation.
pub struct ExactFormatter<'a> {
    inner: PrettyFormatter<'a>,
    compact: bool,
}

impl ExactFormatter<'_> {
    pub fn new(compact: bool) -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
            compact,
        }
    }
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                if self.compact {
                    serde_json::ser::CompactFormatter.$name(writer $(, $arg)*)
                } else {
                    self.inner.$name(writer $(, $arg)*)
                }
            }
        )*
    };
}

impl Formatter for ExactFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` with [`ExactFormatter`] and a trailing newline.
pub fn to_json<T: Serialize>(value: &T, compact: bool) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, ExactFormatter::new(compact));
    value.serialize(&mut ser).expect("report types always serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix, dim: usize, name: &str) -> Result<CMatrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Parse(format!("{name} must be a {dim}x{dim} matrix")));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub format: String,
    pub version: u32,
    pub dim: usize,
    pub gamma1: JsonMatrix,
    pub gamma2: JsonMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMetadata>,
}

impl InstanceFile {
    pub fn from_pair(g1: &WeightedState, g2: &WeightedState, metadata: Option<InstanceMetadata>) -> Self {
        Self {
            format: INSTANCE_FORMAT.to_string(),
            version: INSTANCE_VERSION,
            dim: g1.dim(),
            gamma1: matrix_to_json(g1.matrix()),
            gamma2: matrix_to_json(g2.matrix()),
            metadata,
        }
    }

    /// Parses JSON text; shape problems are parse errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if file.format != INSTANCE_FORMAT {
            return Err(CliError::Parse(format!("unknown format '{}'", file.format)));
        }
        if file.version != INSTANCE_VERSION {
            return Err(CliError::Parse(format!("unsupported version {}", file.version)));
        }
        matrix_from_json(&file.gamma1, file.dim, "gamma1")?;
        matrix_from_json(&file.gamma2, file.dim, "gamma2")?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The two weighted states; physical violations are instance errors.
    pub fn pair(&self, tol: &Tolerances) -> Result<(WeightedState, WeightedState), CliError> {
        let state = |rows: &JsonMatrix, name: &str| -> Result<WeightedState, CliError> {
            let m = matrix_from_json(rows, self.dim, name)?;
            let op = HermitianOperator::new(m, tol).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
            WeightedState::new(op, tol).map_err(|e| CliError::Invalid(format!("{name}: {e}")))
        };
        let g1 = state(&self.gamma1, "gamma1")?;
        let g2 = state(&self.gamma2, "gamma2")?;
        validate_pair(&g1, &g2).map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok((g1, g2))
    }

    pub fn to_json(&self) -> String {
        to_json(self, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_significant_digits() {
        assert_eq!(to_json(&0.1f64, true), "1.0000000000000001e-1\n");
        assert_eq!(to_json(&-2.0f64, true), "-2.0000000000000000e0\n");
        assert_eq!(to_json(&f64::NAN, true), "null\n");
        let x: f64 = 0.1 + 0.2;
        let back: f64 = serde_json::from_str(to_json(&x, true).trim()).unwrap();
        assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn shape_errors_are_parse_errors() {
        let text = r#"{"format":"usd-cbs-instance","version":1,"dim":2,"gamma1":[[[1,0]]],"gamma2":[[[0,0]]]}"#;
        assert!(matches!(InstanceFile::parse(text), Err(CliError::Parse(_))));
    }

    #[test]
    fn physical_errors_are_instance_errors() {
        let text = r#"{"format":"usd-cbs-instance","version":1,"dim":1,"gamma1":[[[0.8,0]]],"gamma2":[[[0.5,0]]]}"#;
        let f = InstanceFile::parse(text).unwrap();
        assert!(matches!(f.pair(&Tolerances::default()), Err(CliError::Invalid(_))));
    }
}
