//! Plan export: textual tables with one column per database.
//!
//! Symbolic tables render equations like `a4+b2`; concrete tables show the
//! randomized queries actually sent, with cells like `w1(3)+w2(7)` (1-based
//! message and bit positions). [`normalize_table`] renames serials into
//! first-occurrence order so two tables can be compared up to serial naming.

use std::collections::HashMap;

use crate::model::DatabaseQuery;
use crate::scheme::plan::SchemePlan;

/// Symbolic plan table: header `DB1 … DBN`, one row per equation.
pub fn render_symbolic(plan: &SchemePlan) -> String {
    let columns: Vec<Vec<String>> = (0..plan.params().databases)
        .map(|db| plan.equations(db).iter().map(|eq| eq.render()).collect())
        .collect();
    layout(&columns)
}

/// Concrete query table in upload order (shuffles applied).
pub fn render_concrete(queries: &[DatabaseQuery]) -> String {
    let columns: Vec<Vec<String>> = queries
        .iter()
        .map(|q| q.equations.iter().map(|eq| eq.to_string()).collect())
        .collect();
    layout(&columns)
}

fn layout(columns: &[Vec<String>]) -> String {
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    let headers: Vec<String> = (1..=columns.len()).map(|db| format!("DB{db}")).collect();
    let widths: Vec<usize> = columns
        .iter()
        .zip(&headers)
        .map(|(column, header)| {
            column
                .iter()
                .map(String::len)
                .chain([header.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let mut push_row = |cells: Vec<&str>| {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{cell:<width$}", width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    };
    push_row(headers.iter().map(String::as_str).collect());
    for row in 0..rows {
        push_row(
            columns
                .iter()
                .map(|column| column.get(row).map(String::as_str).unwrap_or(""))
                .collect(),
        );
    }
    out
}

/// Parse a rendered table into rows of cells, renaming each letter's serials
/// into first-occurrence order (scanning rows top to bottom, left to right).
///
/// Tokens that are not `letter digits(+letter digits)*` pass through
/// unchanged, so headers survive.
pub fn normalize_table(text: &str) -> Vec<Vec<String>> {
    let mut next_serial: HashMap<char, u64> = HashMap::new();
    let mut renamed: HashMap<(char, String), u64> = HashMap::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        let cells: Vec<String> = line
            .split_whitespace()
            .map(|token| normalize_token(token, &mut next_serial, &mut renamed))
            .collect();
        if !cells.is_empty() {
            rows.push(cells);
        }
    }
    rows
}

fn normalize_token(
    token: &str,
    next_serial: &mut HashMap<char, u64>,
    renamed: &mut HashMap<(char, String), u64>,
) -> String {
    let parts: Vec<&str> = token.split('+').collect();
    let parsed: Option<Vec<(char, &str)>> = parts
        .iter()
        .map(|part| {
            let mut chars = part.chars();
            let letter = chars.next()?;
            let rest = chars.as_str();
            (letter.is_ascii_lowercase() && !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                .then_some((letter, rest))
        })
        .collect();
    match parsed {
        None => token.to_string(),
        Some(terms) => terms
            .into_iter()
            .map(|(letter, serial)| {
                let id = *renamed
                    .entry((letter, serial.to_string()))
                    .or_insert_with(|| {
                        let counter = next_serial.entry(letter).or_insert(0);
                        *counter += 1;
                        *counter
                    });
                format!("{letter}{id}")
            })
            .collect::<Vec<_>>()
            .join("+"),
    }
}
