//! CSV datasets for the command-line trainers.
//!
//! Vector datasets have a header naming input columns `x0, x1, ..` followed
//! by either target columns `y0, y1, ..` (regression) or a single `label`
//! column holding a class index. Set datasets add a leading `set` column;
//! rows sharing a set id are the elements of one set and must repeat the same
//! target. Sets keep the order in which their ids first appear.

use std::io::Read;

use crate::error::{Error, Result};
use crate::training::{Dataset, Target};

/// Parsers refuse inputs with more rows than this.
pub const MAX_ROWS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetKind {
    Vector(usize),
    Class,
}

struct Layout {
    has_set: bool,
    inputs: usize,
    target: TargetKind,
}

fn numbered(name: &str, prefix: char) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

fn layout(header: &csv::StringRecord, with_set: bool) -> Result<Layout> {
    let cols: Vec<&str> = header.iter().collect();
    let mut i = 0;
    if with_set {
        if cols.first() != Some(&"set") {
            return Err(Error::parse(1, "first column must be `set`"));
        }
        i = 1;
    }
    let mut inputs = 0;
    while i < cols.len() && numbered(cols[i], 'x') == Some(inputs) {
        inputs += 1;
        i += 1;
    }
    if inputs == 0 {
        return Err(Error::parse(1, "expected input columns x0, x1, .."));
    }
    let target = if cols.get(i) == Some(&"label") {
        i += 1;
        TargetKind::Class
    } else {
        let mut outputs = 0;
        while i < cols.len() && numbered(cols[i], 'y') == Some(outputs) {
            outputs += 1;
            i += 1;
        }
        if outputs == 0 {
            return Err(Error::parse(
                1,
                "expected target columns y0, y1, .. or `label`",
            ));
        }
        TargetKind::Vector(outputs)
    };
    if let Some(extra) = cols.get(i) {
        return Err(Error::parse(1, format!("unexpected column `{extra}`")));
    }
    Ok(Layout {
        has_set: with_set,
        inputs,
        target,
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(input)
}

fn field_f64(line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid number `{tok}`")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

type Row = (Option<String>, Vec<f64>, Target);

fn rows<R: Read>(input: R, with_set: bool) -> Result<Vec<Row>> {
    let mut rdr = reader(input);
    let header = rdr.headers()?.clone();
    let lay = layout(&header, with_set)?;
    let width = header.len();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(Error::parse(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        if out.len() == MAX_ROWS {
            return Err(Error::SizeLimit {
                what: "dataset rows",
                limit: MAX_ROWS,
                got: MAX_ROWS + 1,
            });
        }
        let mut fields = rec.iter();
        let set = if lay.has_set {
            Some(fields.next().unwrap_or_default().to_string())
        } else {
            None
        };
        let x = fields
            .by_ref()
            .take(lay.inputs)
            .map(|t| field_f64(line, t))
            .collect::<Result<Vec<_>>>()?;
        let target = match lay.target {
            TargetKind::Class => {
                let tok = fields.next().unwrap_or_default();
                Target::Class(
                    tok.parse()
                        .map_err(|_| Error::parse(line, format!("invalid class label `{tok}`")))?,
                )
            }
            TargetKind::Vector(_) => {
                Target::Vector(fields.map(|t| field_f64(line, t)).collect::<Result<_>>()?)
            }
        };
        out.push((set, x, target));
    }
    if out.is_empty() {
        return Err(Error::parse(1, "no data rows"));
    }
    Ok(out)
}

pub fn read_vector_dataset<R: Read>(input: R) -> Result<Dataset<Vec<f64>>> {
    Dataset::new(
        rows(input, false)?
            .into_iter()
            .map(|(_, x, t)| (x, t))
            .collect(),
    )
}

pub fn read_set_dataset<R: Read>(input: R) -> Result<Dataset<Vec<Vec<f64>>>> {
    let mut index = std::collections::HashMap::new();
    let mut sets: Vec<(Vec<Vec<f64>>, Target)> = Vec::new();
    for (set, x, t) in rows(input, true)? {
        let id = set.unwrap_or_default();
        match index.get(&id) {
            Some(&k) => {
                let (elems, target): &mut (Vec<Vec<f64>>, Target) = &mut sets[k];
                if *target != t {
                    return Err(Error::invalid(format!(
                        "set `{id}` has conflicting targets"
                    )));
                }
                elems.push(x);
            }
            None => {
                index.insert(id, sets.len());
                sets.push((vec![x], t));
            }
        }
    }
    Dataset::new(sets)
}
