//! Plain-text rendering of JSON results for `--output table`.

use serde_json::{Map, Value};

pub fn render(value: &Value) -> String {
    let mut out = String::new();
    match value {
        Value::Object(map) if map.contains_key("rows") && map.contains_key("columns") => {
            rows(map, &mut out)
        }
        Value::Object(map) => object("", map, &mut out),
        Value::Array(items) => array("", items, &mut out),
        other => out.push_str(&scalar(other)),
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "NA".to_owned(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{}", (f * 1e6).round() / 1e6),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn grid(header: &[String], body: &[Vec<String>], out: &mut String) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String], out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(header, out);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule, out);
    for row in body {
        line(row, out);
    }
}

fn rows(map: &Map<String, Value>, out: &mut String) {
    let header: Vec<String> = map["columns"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|c| c["name"].as_str().unwrap_or_default().to_owned())
        .collect();
    let body: Vec<Vec<String>> = map["rows"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|r| r.as_array().into_iter().flatten().map(scalar).collect())
        .collect();
    grid(&header, &body, out);
    if let Some(n) = map.get("n_rows") {
        out.push_str(&format!("({} of {} rows)\n", body.len(), scalar(n)));
    }
}

/// A named array column of a JSON object.
type Field<'a> = (&'a String, &'a Vec<Value>);

fn object(prefix: &str, map: &Map<String, Value>, out: &mut String) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_owned()
        } else {
            format!("{prefix}.{k}")
        }
    };
    let scalars: Vec<(String, String)> = map
        .iter()
        .filter(|(_, v)| is_scalar(v))
        .map(|(k, v)| (key(k), scalar(v)))
        .collect();
    let width = scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in &scalars {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }

    // Parallel arrays of scalars become one table, the rest are rendered
    // section by section.
    let mut columns: Vec<(&String, &Vec<Value>)> = Vec::new();
    for (k, v) in map {
        match v {
            Value::Array(items) if items.iter().all(is_scalar) => columns.push((k, items)),
            _ => {}
        }
    }
    let mut by_len: Vec<(usize, Vec<Field>)> = Vec::new();
    for (k, items) in columns {
        match by_len.iter_mut().find(|(n, _)| *n == items.len()) {
            Some((_, group)) => group.push((k, items)),
            None => by_len.push((items.len(), vec![(k, items)])),
        }
    }
    for (n, mut group) in by_len {
        // Label columns such as times go first.
        group.sort_by_key(|(_, items)| !items.first().is_some_and(Value::is_string));
        out.push('\n');
        let header: Vec<String> = group.iter().map(|(k, _)| key(k)).collect();
        let body: Vec<Vec<String>> = (0..n)
            .map(|i| group.iter().map(|(_, items)| scalar(&items[i])).collect())
            .collect();
        grid(&header, &body, out);
    }

    for (k, v) in map {
        match v {
            Value::Object(inner) => {
                out.push('\n');
                object(&key(k), inner, out);
            }
            Value::Array(items) if !items.iter().all(is_scalar) => {
                out.push('\n');
                array(&key(k), items, out);
            }
            _ => {}
        }
    }
}

fn array(prefix: &str, items: &[Value], out: &mut String) {
    if items.iter().all(|v| v.is_object()) {
        let mut header: Vec<String> = Vec::new();
        for item in items {
            for (k, v) in item.as_object().into_iter().flatten() {
                if is_scalar(v) && !header.contains(k) {
                    header.push(k.clone());
                }
            }
        }
        if !header.is_empty() {
            let body: Vec<Vec<String>> = items
                .iter()
                .map(|item| {
                    header
                        .iter()
                        .map(|h| scalar(item.get(h).unwrap_or(&Value::Null)))
                        .collect()
                })
                .collect();
            if !prefix.is_empty() {
                out.push_str(&format!("{prefix}:\n"));
            }
            grid(&header, &body, out);
        }
        for (i, item) in items.iter().enumerate() {
            let nested: Map<String, Value> = item
                .as_object()
                .into_iter()
                .flatten()
                .filter(|(_, v)| !is_scalar(v))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if !nested.is_empty() {
                out.push('\n');
                object(&format!("{prefix}[{i}]"), &nested, out);
            }
        }
    } else {
        for (i, item) in items.iter().enumerate() {
            out.push_str(&format!("{prefix}[{i}]  {}\n", scalar(item)));
        }
    }
}
