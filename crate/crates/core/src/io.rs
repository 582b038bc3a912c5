//! Reading and writing point annotations.
//!
//! CSV files have the header `x,y,class` and may carry metadata in leading
//! `#` lines:
//!
//! ```text
//! # domain=0,0,100,100
//! # classes=tumor,stromal
//! x,y,class
//! 10,20,tumor
//! ```
//!
//! JSON files follow `{"domain":[x0,y0,x1,y1],"classes":[...],"points":[[x,y,class_id],...]}`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Cell, CellLayout, Domain, Point2};

/// Default padding (fraction of the bounding-box diagonal) used when a file
/// carries no domain.
pub const DEFAULT_DOMAIN_MARGIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutFormat {
    Csv,
    Json,
}

impl LayoutFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(LayoutFormat::Csv),
            "json" => Some(LayoutFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for LayoutFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LayoutFormat::Csv),
            "json" => Ok(LayoutFormat::Json),
            other => Err(Error::validation(format!("unknown layout format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Domain to use when the file declares none. Takes precedence over the
    /// bounding-box fallback but not over a domain stored in the file.
    pub domain: Option<Domain>,
    /// Fixed class list; classes outside it are rejected.
    pub class_map: Option<Vec<String>>,
    pub margin_fraction: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            domain: None,
            class_map: None,
            margin_fraction: DEFAULT_DOMAIN_MARGIN,
        }
    }
}

pub fn load_layout(path: impl AsRef<Path>, format: LayoutFormat) -> Result<CellLayout> {
    load_layout_with(path, format, &LoadOptions::default())
}

pub fn load_layout_with(
    path: impl AsRef<Path>,
    format: LayoutFormat,
    opts: &LoadOptions,
) -> Result<CellLayout> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_layout(&text, format, opts)
}

pub fn parse_layout(text: &str, format: LayoutFormat, opts: &LoadOptions) -> Result<CellLayout> {
    match format {
        LayoutFormat::Csv => parse_csv(text, opts),
        LayoutFormat::Json => parse_json(text, opts),
    }
}

pub fn save_layout(layout: &CellLayout, path: impl AsRef<Path>, format: LayoutFormat) -> Result<()> {
    let path = path.as_ref();
    let text = layout_to_string(layout, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn layout_to_string(layout: &CellLayout, format: LayoutFormat) -> Result<String> {
    match format {
        LayoutFormat::Csv => Ok(write_csv(layout)),
        LayoutFormat::Json => {
            let mut s = serde_json::to_string_pretty(&LayoutJson::from(layout))?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn parse_number(field: &str, what: &str, record: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Format {
        record,
        message: format!("invalid {what} value '{field}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Format {
            record,
            message: format!("non-finite {what} value '{field}'"),
        });
    }
    Ok(v)
}

fn parse_domain_list(s: &str) -> Result<Domain> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("invalid domain value '{v}'")))
        })
        .collect::<Result<_>>()?;
    match vals.as_slice() {
        [x0, y0, x1, y1] => Domain::new(*x0, *y0, *x1, *y1),
        _ => Err(Error::validation("domain needs exactly four values x0,y0,x1,y1")),
    }
}

struct ClassTable {
    names: Vec<String>,
    fixed: bool,
}

impl ClassTable {
    fn new(class_map: Option<&Vec<String>>) -> Self {
        match class_map {
            Some(m) => Self {
                names: m.clone(),
                fixed: true,
            },
            None => Self {
                names: Vec::new(),
                fixed: false,
            },
        }
    }

    fn id(&mut self, name: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Ok(i);
        }
        if self.fixed {
            return Err(Error::validation(format!("unknown class '{name}'")));
        }
        self.names.push(name.to_string());
        Ok(self.names.len() - 1)
    }
}

fn parse_csv(text: &str, opts: &LoadOptions) -> Result<CellLayout> {
    let mut domain = None;
    let mut declared_classes: Option<Vec<String>> = None;
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once('=') {
                match key.trim() {
                    "domain" => domain = Some(parse_domain_list(value)?),
                    "classes" => {
                        declared_classes = Some(
                            value
                                .split(',')
                                .map(|s| s.trim().to_string())
                                .filter(|s| !s.is_empty())
                                .collect(),
                        )
                    }
                    _ => {}
                }
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        body.push_str(line);
        body.push('\n');
    }

    let class_seed = opts.class_map.as_ref().or(declared_classes.as_ref());
    let mut classes = ClassTable::new(class_seed);
    // Declared classes only fix the order; a supplied class map also restricts.
    if opts.class_map.is_none() {
        classes.fixed = false;
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let mut records = reader.records();

    let mut raw: Vec<(Point2, usize)> = Vec::new();
    match records.next() {
        None => {}
        Some(header) => {
            let header = header.map_err(|e| Error::Format {
                record: 0,
                message: e.to_string(),
            })?;
            let cols: Vec<&str> = header.iter().collect();
            if cols != ["x", "y", "class"] {
                return Err(Error::Format {
                    record: 0,
                    message: format!("expected header 'x,y,class', found '{}'", cols.join(",")),
                });
            }
        }
    }
    for (i, rec) in records.enumerate() {
        let record = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            record,
            message: e.to_string(),
        })?;
        if rec.len() != 3 {
            return Err(Error::Format {
                record,
                message: format!("expected 3 fields (x,y,class), found {}", rec.len()),
            });
        }
        let x = parse_number(&rec[0], "x", record)?;
        let y = parse_number(&rec[1], "y", record)?;
        if rec[2].is_empty() {
            return Err(Error::Format {
                record,
                message: "missing class".into(),
            });
        }
        let class_id = classes.id(&rec[2])?;
        raw.push((Point2::new(x, y), class_id));
    }

    finish(raw, domain, classes.names, opts)
}

fn finish(
    raw: Vec<(Point2, usize)>,
    file_domain: Option<Domain>,
    class_names: Vec<String>,
    opts: &LoadOptions,
) -> Result<CellLayout> {
    let domain = match file_domain.or(opts.domain) {
        Some(d) => d,
        None => {
            let pts: Vec<Point2> = raw.iter().map(|(p, _)| *p).collect();
            Domain::padded_bounding_box(&pts, opts.margin_fraction)?
        }
    };
    let cells = raw
        .into_iter()
        .map(|(pos, class_id)| Cell { pos, class_id })
        .collect();
    CellLayout::new(domain, class_names, cells)
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<[f64; 4]>,
    #[serde(default)]
    classes: Vec<String>,
    points: Vec<(f64, f64, usize)>,
}

impl From<&CellLayout> for LayoutJson {
    fn from(l: &CellLayout) -> Self {
        Self {
            domain: Some(l.domain().as_array()),
            classes: l.class_names().to_vec(),
            points: l
                .cells()
                .iter()
                .map(|c| (c.pos.x, c.pos.y, c.class_id))
                .collect(),
        }
    }
}

fn parse_json(text: &str, opts: &LoadOptions) -> Result<CellLayout> {
    let doc: LayoutJson = serde_json::from_str(text).map_err(|e| Error::Format {
        record: e.line(),
        message: e.to_string(),
    })?;
    let domain = doc
        .domain
        .map(|[x0, y0, x1, y1]| Domain::new(x0, y0, x1, y1))
        .transpose()?;
    let names = match &opts.class_map {
        None => doc.classes,
        Some(map) => {
            for name in &doc.classes {
                if !map.contains(name) {
                    return Err(Error::validation(format!("unknown class '{name}'")));
                }
            }
            // Re-index onto the supplied class map.
            let remap: Vec<usize> = doc
                .classes
                .iter()
                .map(|n| map.iter().position(|m| m == n).unwrap())
                .collect();
            let mut raw = Vec::with_capacity(doc.points.len());
            for (i, (x, y, c)) in doc.points.iter().enumerate() {
                let id = *remap.get(*c).ok_or_else(|| Error::Format {
                    record: i + 1,
                    message: format!("class id {c} out of range"),
                })?;
                raw.push((Point2::new(*x, *y), id));
            }
            return finish(raw, domain, map.clone(), opts);
        }
    };
    let raw = doc
        .points
        .iter()
        .map(|&(x, y, c)| (Point2::new(x, y), c))
        .collect();
    finish(raw, domain, names, opts)
}

fn write_csv(layout: &CellLayout) -> String {
    let d = layout.domain();
    let mut out = format!(
        "# domain={},{},{},{}\n# classes={}\nx,y,class\n",
        d.x_min,
        d.y_min,
        d.x_max,
        d.y_max,
        layout.class_names().join(",")
    );
    for c in layout.cells() {
        // `{}` on f64 prints the shortest string that parses back to the same value.
        out.push_str(&format!(
            "{},{},{}\n",
            c.pos.x,
            c.pos.y,
            layout.class_names()[c.class_id]
        ));
    }
    out
}
