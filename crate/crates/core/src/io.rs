//! Plain-text dataset loader: two columns `x,y` or three columns `x,y,f_star`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::DesignSample;

/// Loaded sample with the optional noiseless column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample: DesignSample,
    pub f_star: Option<Vec<f64>>,
}

/// Parses comma- or whitespace-separated rows. A first line that does not
/// parse as numbers is taken as a header; `#` starts a comment.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut fs = Vec::new();
    let mut width = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty()).collect();
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if width.is_none() && xs.is_empty() => continue,
            Err(_) => return Err(Error::input(format!("line {}: cannot parse {raw:?}", lineno + 1))),
        };
        if !(row.len() == 2 || row.len() == 3) {
            return Err(Error::input(format!("line {}: expected 2 or 3 columns, got {}", lineno + 1, row.len())));
        }
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(Error::input(format!("line {}: inconsistent column count", lineno + 1)));
        }
        xs.push(row[0]);
        ys.push(row[1]);
        if row.len() == 3 {
            fs.push(row[2]);
        }
    }
    let f_star = (width == Some(3)).then_some(fs);
    Ok(Dataset { sample: DesignSample::new(xs, ys)?, f_star })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    parse_dataset(&text)
}
