//! CSV and JSON dataset writers. CSV is the primary format (RFC 4180
//! quoting, `.` decimal, no locale); the JSON mirror carries identical field
//! names. Float formatting is shortest-round-trip in both, so identical
//! inputs produce byte-identical files.

use std::io::Write;

use serde::Serialize;

use crate::sweep::SweepRow;

pub fn write_csv<T: Serialize, W: Write>(writer: W, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(writer: W, rows: &[T]) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(writer, rows)
}

fn fmt_f64(buf: &mut ryu::Buffer, v: f64) -> String {
    if v.is_finite() { buf.format(v).to_string() } else if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() }
}

/// Long-form sweep CSV: one row per node, axis2 fastest, with the axis
/// parameter names as the leading column headers.
pub fn write_sweep_csv<W: Write>(
    writer: W,
    axis1_name: &str,
    axis2_name: Option<&str>,
    rows: &[SweepRow],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![axis1_name.to_string()];
    if let Some(a2) = axis2_name {
        header.push(a2.to_string());
    }
    header.extend(
        [
            "transmission",
            "re_tp",
            "im_tp",
            "group_delay_s",
            "eta",
            "x_bar_m",
            "n_bar",
            "branch_count",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let mut buf = ryu::Buffer::new();
    for row in rows {
        let mut record = vec![fmt_f64(&mut buf, row.axis1)];
        if axis2_name.is_some() {
            record.push(fmt_f64(&mut buf, row.axis2.unwrap_or(f64::NAN)));
        }
        record.push(fmt_f64(&mut buf, row.transmission));
        record.push(fmt_f64(&mut buf, row.re_tp));
        record.push(fmt_f64(&mut buf, row.im_tp));
        record.push(fmt_f64(&mut buf, row.group_delay_s));
        record.push(fmt_f64(&mut buf, row.eta));
        record.push(fmt_f64(&mut buf, row.x_bar_m));
        record.push(fmt_f64(&mut buf, row.n_bar));
        record.push(row.branch_count.map_or(String::new(), |c| c.to_string()));
        record.push(row.error.clone().unwrap_or_default());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON mirror of the sweep table, field names matching the CSV header.
pub fn write_sweep_json<W: Write>(
    writer: W,
    axis1_name: &str,
    axis2_name: Option<&str>,
    rows: &[SweepRow],
) -> serde_json::Result<()> {
    let objects: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            let mut map = serde_json::Map::new();
            let num = |v: f64| {
                serde_json::Number::from_f64(v)
                    .map_or(serde_json::Value::Null, serde_json::Value::Number)
            };
            map.insert(axis1_name.into(), num(row.axis1));
            if let Some(a2) = axis2_name {
                map.insert(a2.into(), num(row.axis2.unwrap_or(f64::NAN)));
            }
            map.insert("transmission".into(), num(row.transmission));
            map.insert("re_tp".into(), num(row.re_tp));
            map.insert("im_tp".into(), num(row.im_tp));
            map.insert("group_delay_s".into(), num(row.group_delay_s));
            map.insert("eta".into(), num(row.eta));
            map.insert("x_bar_m".into(), num(row.x_bar_m));
            map.insert("n_bar".into(), num(row.n_bar));
            map.insert(
                "branch_count".into(),
                row.branch_count.map_or(serde_json::Value::Null, |c| c.into()),
            );
            map.insert(
                "error".into(),
                row.error.clone().map_or(serde_json::Value::Null, serde_json::Value::String),
            );
            serde_json::Value::Object(map)
        })
        .collect();
    serde_json::to_writer_pretty(writer, &objects)
}
