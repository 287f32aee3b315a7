//! Numeric relations with explicit missing-value masks.
//!
//! A [`Relation`] is an n x m table of 64-bit floats plus a boolean mask
//! (`true` = missing). Rows keep their load order throughout; the 0-based
//! original row index is a tuple's identity everywhere in this crate.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Tokens that mark a missing value. The empty field is always a marker;
/// the listed tokens (exact match after trimming) are additional markers.
#[derive(Debug, Clone)]
pub struct MissingMarkers {
    tokens: BTreeSet<String>,
}

impl Default for MissingMarkers {
    fn default() -> Self {
        MissingMarkers::new(["NA", "?"])
    }
}

impl MissingMarkers {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MissingMarkers {
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    /// True for the empty field or any configured marker token.
    pub fn matches(&self, field: &str) -> bool {
        field.is_empty() || self.tokens.contains(field)
    }
}

/// An in-memory numeric table with a missing-value mask.
///
/// Invariants, enforced at construction: values and mask share dimensions,
/// m >= 2, n >= 1, every unmasked cell is finite, and column names are
/// unique and non-empty. The stored value of a masked cell is NaN so that
/// accidental reads surface quickly.
#[derive(Debug, Clone)]
pub struct Relation {
    names: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
    rows: usize,
    cols: usize,
}

impl Relation {
    pub fn new(names: Vec<String>, values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        let cols = names.len();
        if cols < 2 {
            return Err(Error::Schema(format!(
                "a relation needs at least 2 columns, got {cols}"
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name '{name}'")));
            }
        }
        if values.len() != mask.len() || !values.len().is_multiple_of(cols) {
            return Err(Error::Schema(
                "values and mask must be n x m with matching dimensions".into(),
            ));
        }
        let rows = values.len() / cols;
        if rows == 0 {
            return Err(Error::Structure {
                row: 2,
                message: "no data rows".into(),
            });
        }
        let mut values = values;
        for (idx, missing) in mask.iter().enumerate() {
            if *missing {
                values[idx] = f64::NAN;
            } else if !values[idx].is_finite() {
                return Err(Error::Schema(format!(
                    "non-finite value at row {}, column {}",
                    idx / cols,
                    idx % cols
                )));
            }
        }
        Ok(Relation {
            names,
            values,
            mask,
            rows,
            cols,
        })
    }

    /// Build a fully complete relation from row-major data.
    pub fn from_rows<S: Into<String>>(names: Vec<S>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let cols = names.len();
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Structure {
                    row: i + 2,
                    message: format!("expected {cols} fields, got {}", row.len()),
                });
            }
            values.extend_from_slice(row);
        }
        let mask = vec![false; values.len()];
        Relation::new(names, values, mask)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, col: usize) -> &str {
        &self.names[col]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.mask[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mask(&self, row: usize) -> &[bool] {
        &self.mask[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_is_complete(&self, row: usize) -> bool {
        !self.row_mask(row).iter().any(|&m| m)
    }

    pub fn missing_cells(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Fill a masked cell with a value, clearing its mask bit.
    pub fn fill(&mut self, row: usize, col: usize, value: f64) {
        let idx = row * self.cols + col;
        self.values[idx] = value;
        self.mask[idx] = false;
    }

    /// Mark a cell missing, discarding its value.
    pub fn mask_cell(&mut self, row: usize, col: usize) {
        let idx = row * self.cols + col;
        self.values[idx] = f64::NAN;
        self.mask[idx] = true;
    }

    /// Bitwise equality of unmasked values plus identical masks.
    pub fn same_data(&self, other: &Relation) -> bool {
        if self.names != other.names || self.rows != other.rows || self.mask != other.mask {
            return false;
        }
        self.values
            .iter()
            .zip(&other.values)
            .zip(&self.mask)
            .all(|((a, b), &m)| m || a.to_bits() == b.to_bits())
    }
}

/// The complete sub-relation r: exactly the rows with no masked cell,
/// in original order, plus the mapping back to original row indices.
#[derive(Debug, Clone)]
pub struct CompleteRelation {
    pub relation: Relation,
    pub original_rows: Vec<usize>,
}

impl CompleteRelation {
    pub fn len(&self) -> usize {
        self.relation.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.relation.row(i)
    }

    pub fn value(&self, i: usize, col: usize) -> f64 {
        self.relation.value(i, col)
    }
}

/// Partition a relation into its complete sub-relation and the original
/// indices of incomplete rows.
pub fn split_complete(rel: &Relation) -> Result<(CompleteRelation, Vec<usize>)> {
    let mut complete_rows = Vec::new();
    let mut incomplete = Vec::new();
    for r in 0..rel.rows() {
        if rel.row_is_complete(r) {
            complete_rows.push(r);
        } else {
            incomplete.push(r);
        }
    }
    if complete_rows.is_empty() {
        return Err(Error::NoCompleteTuples);
    }
    let mut values = Vec::with_capacity(complete_rows.len() * rel.cols());
    for &r in &complete_rows {
        values.extend_from_slice(rel.row(r));
    }
    let mask = vec![false; values.len()];
    let relation = Relation::new(rel.names().to_vec(), values, mask)?;
    Ok((
        CompleteRelation {
            relation,
            original_rows: complete_rows,
        },
        incomplete,
    ))
}

/// The set of masked attributes of a tuple and its complement F.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingPattern {
    pub incomplete: Vec<usize>,
    pub complete: Vec<usize>,
}

impl MissingPattern {
    pub fn from_mask_row(mask: &[bool]) -> Self {
        let mut incomplete = Vec::new();
        let mut complete = Vec::new();
        for (c, &m) in mask.iter().enumerate() {
            if m {
                incomplete.push(c);
            } else {
                complete.push(c);
            }
        }
        MissingPattern {
            incomplete,
            complete,
        }
    }
}

/// Group incomplete tuples by their missing pattern. Each tuple appears
/// under exactly one pattern; iteration order is deterministic.
pub fn group_by_pattern(
    rel: &Relation,
    incomplete_indices: &[usize],
) -> BTreeMap<MissingPattern, Vec<usize>> {
    let mut groups: BTreeMap<MissingPattern, Vec<usize>> = BTreeMap::new();
    for &row in incomplete_indices {
        let pattern = MissingPattern::from_mask_row(rel.row_mask(row));
        groups.entry(pattern).or_default().push(row);
    }
    groups
}

// --- CSV ---

/// Split raw CSV text into records of fields, honoring double-quote
/// delimiters with `""` escapes. Returns (1-based starting line, fields).
fn parse_csv_records(text: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut records = Vec::new();
    let mut field = String::new();
    let mut record: Vec<String> = Vec::new();
    let mut line = 1usize;
    let mut record_line = 1usize;
    let mut in_quotes = false;
    let mut field_started_quoted = false;
    let mut chars = text.chars().peekable();

    macro_rules! end_field {
        () => {{
            let value = if field_started_quoted {
                field.clone()
            } else {
                field.trim().to_string()
            };
            record.push(value);
            field.clear();
            field_started_quoted = false;
        }};
    }

    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' => {
                    if chars.peek() == Some(&'"') {
                        chars.next();
                        field.push('"');
                    } else {
                        in_quotes = false;
                    }
                }
                '\n' => {
                    line += 1;
                    field.push(c);
                }
                _ => field.push(c),
            }
            continue;
        }
        match c {
            '"' if field.trim().is_empty() && !field_started_quoted => {
                in_quotes = true;
                field_started_quoted = true;
                field.clear();
            }
            ',' => end_field!(),
            '\r' => {
                if chars.peek() == Some(&'\n') {
                    continue;
                }
                // lone \r treated as newline
                end_field!();
                if !(record.len() == 1 && record[0].is_empty()) {
                    records.push((record_line, std::mem::take(&mut record)));
                }
                record.clear();
                line += 1;
                record_line = line;
            }
            '\n' => {
                end_field!();
                if !(record.len() == 1 && record[0].is_empty()) {
                    records.push((record_line, std::mem::take(&mut record)));
                }
                record.clear();
                line += 1;
                record_line = line;
            }
            _ => field.push(c),
        }
    }
    if in_quotes {
        return Err(Error::Structure {
            row: record_line,
            message: "unterminated quoted field".into(),
        });
    }
    if !field.is_empty() || !record.is_empty() {
        end_field!();
        if !(record.len() == 1 && record[0].is_empty()) {
            records.push((record_line, record));
        }
    }
    let _ = field_started_quoted;
    Ok(records)
}

/// Load a relation from CSV: first record is the header, fields are numeric
/// literals (decimal point only) or missing markers.
pub fn load_relation<R: Read>(mut reader: R, markers: &MissingMarkers) -> Result<Relation> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    load_relation_str(&text, markers)
}

pub fn load_relation_str(text: &str, markers: &MissingMarkers) -> Result<Relation> {
    let records = parse_csv_records(text)?;
    let mut iter = records.into_iter();
    let (_, names) = iter.next().ok_or(Error::Structure {
        row: 1,
        message: "empty stream: missing header row".into(),
    })?;
    let cols = names.len();

    let mut values = Vec::new();
    let mut mask = Vec::new();
    let mut rows = 0usize;
    for (line, fields) in iter {
        if fields.len() != cols {
            return Err(Error::Structure {
                row: line,
                message: format!("expected {cols} fields, got {}", fields.len()),
            });
        }
        for (c, field) in fields.iter().enumerate() {
            if markers.matches(field) {
                values.push(f64::NAN);
                mask.push(true);
            } else {
                let parsed: f64 = field.parse().map_err(|_| Error::Parse {
                    row: line,
                    column: c + 1,
                    message: format!("'{field}' is neither a number nor a missing marker"),
                })?;
                if !parsed.is_finite() {
                    return Err(Error::Parse {
                        row: line,
                        column: c + 1,
                        message: format!("non-finite value '{field}'"),
                    });
                }
                values.push(parsed);
                mask.push(false);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Structure {
            row: 2,
            message: "no data rows".into(),
        });
    }
    Relation::new(names, values, mask)
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Serialize a float with the shortest representation that reloads to the
/// identical bits.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Write a relation as CSV. Masked cells become empty fields; values use
/// shortest round-trip formatting.
pub fn write_relation<W: Write>(rel: &Relation, writer: &mut W) -> std::io::Result<()> {
    let header: Vec<String> = rel.names().iter().map(|n| csv_escape(n)).collect();
    writeln!(writer, "{}", header.join(","))?;
    for r in 0..rel.rows() {
        let mut line = String::new();
        for c in 0..rel.cols() {
            if c > 0 {
                line.push(',');
            }
            if !rel.is_missing(r, c) {
                line.push_str(&format_value(rel.value(r, c)));
            }
        }
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

pub fn relation_to_csv(rel: &Relation) -> String {
    let mut out = Vec::new();
    write_relation(rel, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("CSV output is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::figure_relation;

    #[test]
    fn load_marks_empty_field_missing() {
        let rel = load_relation_str("A1,A2\n0,5.8\n5,\n", &MissingMarkers::default()).unwrap();
        assert_eq!(rel.rows(), 2);
        assert_eq!(rel.cols(), 2);
        assert!(!rel.is_missing(0, 0));
        assert!(!rel.is_missing(0, 1));
        assert!(!rel.is_missing(1, 0));
        assert!(rel.is_missing(1, 1));
        assert_eq!(rel.value(1, 0), 5.0);
    }

    #[test]
    fn load_worked_example_table() {
        let rel = figure_relation();
        assert_eq!(rel.rows(), 9);
        assert_eq!(rel.cols(), 2);
        assert_eq!(rel.missing_cells(), 1);
        assert!(rel.is_missing(8, 1));
        assert_eq!(rel.value(8, 0), 5.0);
        assert_eq!(rel.value(0, 1), 5.8);
    }

    #[test]
    fn load_custom_marker() {
        let markers = MissingMarkers::new(["NA"]);
        let rel = load_relation_str("a,b\n1,NA\n2,3\n", &markers).unwrap();
        assert!(rel.is_missing(0, 1));
        assert!(!rel.is_missing(1, 1));
    }

    #[test]
    fn load_rejects_bad_token_with_location() {
        let err = load_relation_str("a,b\n1,2\n3,x7\n", &MissingMarkers::default()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_non_finite_literals() {
        for token in ["inf", "-inf", "NaN"] {
            let text = format!("a,b\n1,{token}\n");
            let err = load_relation_str(&text, &MissingMarkers::default()).unwrap_err();
            assert!(
                matches!(
                    err,
                    Error::Parse {
                        row: 2,
                        column: 2,
                        ..
                    }
                ),
                "{token}"
            );
        }
    }

    #[test]
    fn quoted_header_survives_round_trip() {
        let rel = load_relation_str("\"x,1\",y\n1,2\n", &MissingMarkers::default()).unwrap();
        let text = relation_to_csv(&rel);
        assert!(text.starts_with("\"x,1\",y\n"));
        let reloaded = load_relation_str(&text, &MissingMarkers::default()).unwrap();
        assert!(rel.same_data(&reloaded));
    }

    #[test]
    fn load_rejects_ragged_row() {
        let err = load_relation_str("a,b\n1,2,3\n", &MissingMarkers::default()).unwrap_err();
        assert!(matches!(err, Error::Structure { row: 2, .. }));
    }

    #[test]
    fn load_rejects_duplicate_header() {
        let err = load_relation_str("a,a\n1,2\n", &MissingMarkers::default()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn load_rejects_single_column_and_empty_body() {
        assert!(load_relation_str("a\n1\n", &MissingMarkers::default()).is_err());
        assert!(load_relation_str("a,b\n", &MissingMarkers::default()).is_err());
    }

    #[test]
    fn load_handles_quoted_fields() {
        let rel =
            load_relation_str("\"x,1\",y\n\"1.5\",2\n3,4\n", &MissingMarkers::default()).unwrap();
        assert_eq!(rel.name(0), "x,1");
        assert_eq!(rel.value(0, 0), 1.5);
    }

    #[test]
    fn split_figure_relation() {
        let rel = figure_relation();
        let (r, incomplete) = split_complete(&rel).unwrap();
        assert_eq!(r.len(), 8);
        assert_eq!(r.original_rows, (0..8).collect::<Vec<_>>());
        assert_eq!(incomplete, vec![8]);
        for i in 0..r.len() {
            assert!(r.relation.row_is_complete(i));
        }
    }

    #[test]
    fn split_fully_complete_relation() {
        let rel =
            Relation::from_rows(vec!["a", "b"], vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let (r, incomplete) = split_complete(&rel).unwrap();
        assert_eq!(r.len(), 2);
        assert!(incomplete.is_empty());
    }

    #[test]
    fn split_errors_when_column_fully_masked() {
        let rel = load_relation_str("a,b\n1,\n2,\n", &MissingMarkers::default()).unwrap();
        assert!(matches!(split_complete(&rel), Err(Error::NoCompleteTuples)));
    }

    #[test]
    fn group_single_pattern() {
        let rel = load_relation_str("a,b\n1,2\n3,\n", &MissingMarkers::default()).unwrap();
        let groups = group_by_pattern(&rel, &[1]);
        assert_eq!(groups.len(), 1);
        let (pattern, rows) = groups.iter().next().unwrap();
        assert_eq!(pattern.incomplete, vec![1]);
        assert_eq!(pattern.complete, vec![0]);
        assert_eq!(rows, &vec![1]);
    }

    #[test]
    fn group_distinct_patterns() {
        let text = "a,b,c\n1,2,3\n4,,6\n7,,\n8,,9\n";
        let rel = load_relation_str(text, &MissingMarkers::default()).unwrap();
        let groups = group_by_pattern(&rel, &[1, 2, 3]);
        assert_eq!(groups.len(), 2);
        let patterns: Vec<_> = groups.keys().map(|p| p.incomplete.clone()).collect();
        assert_eq!(patterns, vec![vec![1], vec![1, 2]]);
        assert_eq!(groups.values().map(|v| v.len()).sum::<usize>(), 3);
    }

    #[test]
    fn group_figure_pattern() {
        let rel = figure_relation();
        let (_, incomplete) = split_complete(&rel).unwrap();
        let groups = group_by_pattern(&rel, &incomplete);
        assert_eq!(groups.len(), 1);
        let pattern = groups.keys().next().unwrap();
        assert_eq!(pattern.incomplete, vec![1]);
        assert_eq!(pattern.complete, vec![0]);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = crate::rng::Rng::seed_from(33);
        for _ in 0..20 {
            let rows = 1 + rng.below(12) as usize;
            let cols = 2 + rng.below(4) as usize;
            let names: Vec<String> = (0..cols).map(|c| format!("c{c}")).collect();
            let mut values = Vec::new();
            let mut mask = Vec::new();
            for _ in 0..rows * cols {
                let missing = rng.next_f64() < 0.2;
                mask.push(missing);
                values.push(if missing {
                    f64::NAN
                } else {
                    // mix of scales, signs and exact negative zero
                    match rng.below(5) {
                        0 => -0.0,
                        1 => rng.range_f64(-1e9, 1e9),
                        2 => rng.next_f64() * 1e-8,
                        3 => rng.below(1000) as f64,
                        _ => rng.range_f64(-10.0, 10.0),
                    }
                });
            }
            let rel = Relation::new(names, values, mask).unwrap();
            let text = relation_to_csv(&rel);
            let reloaded = load_relation_str(&text, &MissingMarkers::default()).unwrap();
            assert!(rel.same_data(&reloaded), "round trip changed data:\n{text}");
        }
    }

    #[test]
    fn integer_valued_floats_echo_verbatim() {
        let rel = load_relation_str("a,b\n5,6.25\n", &MissingMarkers::default()).unwrap();
        assert_eq!(relation_to_csv(&rel), "a,b\n5,6.25\n");
    }
}
