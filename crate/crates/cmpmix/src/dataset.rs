//! Frequency-table files.
//!
//! Three CSV layouts are accepted, distinguished by their header:
//!
//! * `value,count` with integer support values,
//! * `label,count` where labels map to `1..=T` in file order,
//! * `value,label,count` with both.
//!
//! Anything else is read as a raw list of observations, one integer per
//! line. A value or label ending in `+` (a censored top bin such as `15+`)
//! is treated as the ordinary top value. Values missing from a `value`
//! table count as zero.

use std::path::Path;

use cmpmix_core::{FrequencyTable, Support};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReadOptions {
    /// Declared support; otherwise the smallest to largest value seen.
    pub support: Option<(u32, u32)>,
}

pub fn read_dataset(path: impl AsRef<Path>, options: &ReadOptions) -> Result<FrequencyTable> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Values,
    Labels,
    ValuesAndLabels,
    Raw,
}

fn layout(header: &[String]) -> Layout {
    let names: Vec<&str> = header.iter().map(|h| h.trim()).collect();
    match names.as_slice() {
        ["value", "count"] => Layout::Values,
        ["label", "count"] => Layout::Labels,
        ["value", "label", "count"] => Layout::ValuesAndLabels,
        _ => Layout::Raw,
    }
}

fn parse_value(s: &str, line: u64) -> Result<u32> {
    let s = s.trim();
    let s = s.strip_suffix('+').unwrap_or(s).trim();
    s.parse().map_err(|_| {
        Error::parse(
            line,
            format!("expected a non-negative integer, found {s:?}"),
        )
    })
}

fn parse_count(s: &str, line: u64) -> Result<u64> {
    let s = s.trim();
    let count: i64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("expected an integer count, found {s:?}")))?;
    u64::try_from(count).map_err(|_| Error::NegativeCount { line, count })
}

struct Row {
    line: u64,
    fields: Vec<String>,
}

fn rows(text: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push(Row {
            line,
            fields: record.iter().map(str::to_string).collect(),
        });
    }
    Ok(out)
}

fn expect_fields(row: &Row, n: usize) -> Result<()> {
    if row.fields.len() == n {
        Ok(())
    } else {
        Err(Error::parse(
            row.line,
            format!("expected {n} fields, found {}", row.fields.len()),
        ))
    }
}

fn resolve_support(
    declared: Option<(u32, u32)>,
    seen: impl Iterator<Item = u32> + Clone,
) -> Result<Support> {
    let (lower, upper) = match declared {
        Some(bounds) => bounds,
        None => {
            let lo = seen.clone().min().ok_or(Error::Empty)?;
            let hi = seen.max().ok_or(Error::Empty)?;
            (lo, hi)
        }
    };
    Ok(Support::new(lower, upper)?)
}

fn check_in(support: &Support, value: u32, line: u64) -> Result<usize> {
    support.index_of(value).ok_or(Error::OutOfSupport {
        line,
        value,
        lower: support.lower(),
        upper: support.upper(),
    })
}

pub fn parse_dataset(text: &str, options: &ReadOptions) -> Result<FrequencyTable> {
    let rows = rows(text)?;
    let Some(first) = rows.first() else {
        return Err(Error::parse(1, "empty file"));
    };
    let kind = layout(&first.fields);
    let body = if kind == Layout::Raw {
        &rows[..]
    } else {
        &rows[1..]
    };
    if body.is_empty() {
        return Err(Error::parse(first.line, "no data rows"));
    }
    match kind {
        Layout::Raw => raw_list(body, options),
        Layout::Values => values_table(body, options),
        Layout::Labels => labels_table(body, options),
        Layout::ValuesAndLabels => values_labels_table(body, options),
    }
}

fn raw_list(body: &[Row], options: &ReadOptions) -> Result<FrequencyTable> {
    let mut values = Vec::with_capacity(body.len());
    for row in body {
        expect_fields(row, 1)?;
        values.push((parse_value(&row.fields[0], row.line)?, row.line));
    }
    let support = resolve_support(options.support, values.iter().map(|v| v.0))?;
    let mut counts = vec![0u64; support.len()];
    for (value, line) in values {
        counts[check_in(&support, value, line)?] += 1;
    }
    Ok(FrequencyTable::new(support, counts)?)
}

fn values_table(body: &[Row], options: &ReadOptions) -> Result<FrequencyTable> {
    let mut entries = Vec::with_capacity(body.len());
    for row in body {
        expect_fields(row, 2)?;
        let value = parse_value(&row.fields[0], row.line)?;
        let count = parse_count(&row.fields[1], row.line)?;
        entries.push((value, count, row.line));
    }
    let support = resolve_support(options.support, entries.iter().map(|e| e.0))?;
    let mut counts = vec![0u64; support.len()];
    let mut seen = vec![false; support.len()];
    for (value, count, line) in entries {
        let i = check_in(&support, value, line)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::parse(line, format!("duplicate value {value}")));
        }
        counts[i] = count;
    }
    Ok(FrequencyTable::new(support, counts)?)
}

fn labels_table(body: &[Row], options: &ReadOptions) -> Result<FrequencyTable> {
    let mut labels = Vec::with_capacity(body.len());
    let mut counts = Vec::with_capacity(body.len());
    for (i, row) in body.iter().enumerate() {
        expect_fields(row, 2)?;
        let label = row.fields[0].clone();
        if label.ends_with('+') && i + 1 != body.len() {
            return Err(Error::parse(
                row.line,
                "a censored `+` bin must be the last row",
            ));
        }
        labels.push(label);
        counts.push(parse_count(&row.fields[1], row.line)?);
    }
    let lower = options.support.map_or(1, |s| s.0);
    let upper = lower + counts.len() as u32 - 1;
    if let Some(declared) = options.support {
        if declared != (lower, upper) {
            return Err(Error::parse(
                body[0].line,
                format!(
                    "{} labels do not fill the declared support {}..={}",
                    counts.len(),
                    declared.0,
                    declared.1
                ),
            ));
        }
    }
    let table = FrequencyTable::new(Support::new(lower, upper)?, counts)?;
    Ok(table.with_labels(labels)?)
}

fn values_labels_table(body: &[Row], options: &ReadOptions) -> Result<FrequencyTable> {
    let mut entries = Vec::with_capacity(body.len());
    for row in body {
        expect_fields(row, 3)?;
        let value = parse_value(&row.fields[0], row.line)?;
        let count = parse_count(&row.fields[2], row.line)?;
        entries.push((value, row.fields[1].clone(), count, row.line));
    }
    let support = resolve_support(options.support, entries.iter().map(|e| e.0))?;
    if entries.len() != support.len() {
        return Err(Error::parse(
            body[0].line,
            "labelled tables need exactly one row per support value",
        ));
    }
    let mut counts = vec![0u64; support.len()];
    let mut labels = vec![String::new(); support.len()];
    for (value, label, count, line) in entries {
        let i = check_in(&support, value, line)?;
        counts[i] = count;
        labels[i] = label;
    }
    let table = FrequencyTable::new(support, counts)?;
    Ok(table.with_labels(labels)?)
}

/// Serializes as `value,count`, or `value,label,count` when labelled.
pub fn write_dataset(table: &FrequencyTable) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let support = table.support();
    match table.labels() {
        Some(labels) => {
            writer.write_record(["value", "label", "count"])?;
            for (i, (label, count)) in labels.iter().zip(table.counts()).enumerate() {
                writer.write_record([
                    support.value_at(i).to_string(),
                    label.clone(),
                    count.to_string(),
                ])?;
            }
        }
        None => {
            writer.write_record(["value", "count"])?;
            for (i, count) in table.counts().iter().enumerate() {
                writer.write_record([support.value_at(i).to_string(), count.to_string()])?;
            }
        }
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reverses the order of the counts (and labels); the support is unchanged.
pub fn flip_order(table: &FrequencyTable) -> FrequencyTable {
    table.flipped()
}

/// Parses `lower:upper`.
pub fn parse_support(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lower:upper, found {s:?}"))?;
    let lo = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper bound {hi:?}"))?;
    Ok((lo, hi))
}
