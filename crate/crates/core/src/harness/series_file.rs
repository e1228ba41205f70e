use std::io::BufRead;

use crate::error::{Error, Result};

/// A column read from a delimited series file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesColumn {
    pub name: String,
    pub values: Vec<f64>,
    /// From a `readout_interval_s=` tag in a comment line, if present.
    pub interval: Option<f64>,
}

/// Read one column of a comma-separated series. `column` is a header name or
/// a zero-based index; by default `ac_a` when a header has it, else column 0.
pub fn read_series_column<R: BufRead>(r: R, column: Option<&str>) -> Result<SeriesColumn> {
    let mut interval = None;
    let mut header: Option<Vec<String>> = None;
    let mut index: Option<usize> = None;
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for tok in comment.split_whitespace() {
                if let Some(v) = tok.strip_prefix("readout_interval_s=") {
                    interval = Some(v.parse().map_err(|_| {
                        Error::Parse(format!("line {}: bad readout_interval_s", lineno + 1))
                    })?);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if index.is_none() {
            let is_header = fields.iter().any(|f| f.parse::<f64>().is_err());
            if is_header {
                header = Some(fields.iter().map(|s| s.to_string()).collect());
            }
            index = Some(resolve(column, header.as_deref(), fields.len())?);
            if is_header {
                continue;
            }
        }
        let i = index.unwrap_or(0);
        let field = fields
            .get(i)
            .ok_or_else(|| Error::Parse(format!("line {}: missing column {i}", lineno + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: '{field}' is not a number", lineno + 1)))?;
        values.push(v);
    }
    let i = index.ok_or_else(|| Error::Parse("series file has no data".into()))?;
    let name = header
        .as_ref()
        .and_then(|h| h.get(i).cloned())
        .unwrap_or_else(|| format!("column{i}"));
    Ok(SeriesColumn {
        name,
        values,
        interval,
    })
}

fn resolve(column: Option<&str>, header: Option<&[String]>, width: usize) -> Result<usize> {
    let i = match (column, header) {
        (Some(c), _) if c.parse::<usize>().is_ok() => c.parse::<usize>().unwrap_or(0),
        (Some(c), Some(h)) => h
            .iter()
            .position(|n| n == c)
            .ok_or_else(|| Error::arg(format!("no column named '{c}'; have {}", h.join(", "))))?,
        (Some(c), None) => return Err(Error::arg(format!("no header to look up column '{c}'"))),
        (None, Some(h)) => h.iter().position(|n| n == "ac_a").unwrap_or(0),
        (None, None) => 0,
    };
    if i >= width {
        return Err(Error::arg(format!("column {i} beyond the {width} present")));
    }
    Ok(i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_tagged_series() {
        let text = "# hetcorr-series v1 readout_interval_s=5e-4 channel=128\n\
                    readout,time_s,ac_a,ac_b\n0,0,1.5,2\n1,5e-4,2.5,3\n";
        let s = read_series_column(text.as_bytes(), None).unwrap();
        assert_eq!(s.name, "ac_a");
        assert_eq!(s.values, vec![1.5, 2.5]);
        assert_eq!(s.interval, Some(5e-4));
        let b = read_series_column(text.as_bytes(), Some("ac_b")).unwrap();
        assert_eq!(b.values, vec![2.0, 3.0]);
        let idx = read_series_column(text.as_bytes(), Some("1")).unwrap();
        assert_eq!(idx.values, vec![0.0, 5e-4]);
    }

    #[test]
    fn bare_numbers_and_errors() {
        let s = read_series_column("1\n2\n3\n".as_bytes(), None).unwrap();
        assert_eq!(s.values.len(), 3);
        assert_eq!(s.interval, None);
        assert!(matches!(
            read_series_column("1\nx\n".as_bytes(), None),
            Err(Error::Parse(_))
        ));
        assert!(read_series_column("a,b\n1,2\n".as_bytes(), Some("c")).is_err());
        assert!(read_series_column("# only\n".as_bytes(), None).is_err());
    }
}
