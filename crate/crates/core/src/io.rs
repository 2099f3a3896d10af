//! Realization CSV: `realization_id,t,value[,score,label]`, one row per
//! event, times strictly increasing within each id.
//!
//! A realization without events is written as a single row with empty `t`
//! and `value` so that it still counts towards `M` when fitting.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::arrival::{Event, Realization};
use crate::error::{Error, Result};

/// Read every realization in the file, ordered by id.
pub fn read_realizations<R: Read>(input: R, horizon: f64) -> Result<Vec<(u64, Realization)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| Error::Schema(format!("missing column `{name}`")));
    let (id_col, t_col, v_col) = (need("realization_id")?, need("t")?, need("value")?);
    let (score_col, label_col) = (col("score"), col("label"));
    if score_col.is_some() != label_col.is_some() {
        return Err(Error::Schema("`score` and `label` columns must appear together".into()));
    }

    let mut groups: BTreeMap<u64, Vec<Event>> = BTreeMap::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let id: u64 = field(id_col)
            .parse()
            .map_err(|e| Error::Schema(format!("row {row}: bad realization_id {:?}: {e}", field(id_col))))?;
        let events = groups.entry(id).or_default();
        if field(t_col).is_empty() && field(v_col).is_empty() {
            continue;
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            field(i).parse().map_err(|e| Error::Schema(format!("row {row}: bad {what} {:?}: {e}", field(i))))
        };
        let t = num(t_col, "t")?;
        let value = num(v_col, "value")?;
        if let Some(prev) = events.last() {
            if t <= prev.t {
                return Err(Error::Schema(format!(
                    "row {row}: times for realization {id} are not strictly increasing"
                )));
            }
        }
        let mut event = Event::new(t, value);
        if let (Some(sc), Some(lc)) = (score_col, label_col) {
            event.score = Some(num(sc, "score")?);
            let label = field(lc);
            event.label = Some(match label {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Schema(format!("row {row}: label {other:?} is not 0 or 1"))),
            });
        }
        events.push(event);
    }
    if groups.is_empty() {
        return Err(Error::Schema("no realizations in CSV".into()));
    }
    groups
        .into_iter()
        .map(|(id, events)| {
            Realization::new(events, horizon)
                .map(|r| (id, r))
                .map_err(|e| Error::Schema(format!("realization {id}: {e}")))
        })
        .collect()
}

pub fn write_realizations<'a, W, I>(out: W, realizations: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a Realization)>,
{
    let items: Vec<(u64, &Realization)> = realizations.into_iter().collect();
    let scored = items.iter().any(|(_, r)| !r.is_empty()) && items.iter().all(|(_, r)| r.is_scored());
    let mut w = csv::Writer::from_writer(out);
    if scored {
        w.write_record(["realization_id", "t", "value", "score", "label"])?;
    } else {
        w.write_record(["realization_id", "t", "value"])?;
    }
    for (id, r) in items {
        if r.is_empty() {
            if scored {
                w.write_record([id.to_string().as_str(), "", "", "", ""])?;
            } else {
                w.write_record([id.to_string().as_str(), "", ""])?;
            }
            continue;
        }
        for e in r.events() {
            let mut row = vec![id.to_string(), e.t.to_string(), e.value.to_string()];
            if scored {
                row.push(e.score.unwrap_or_default().to_string());
                row.push(e.label.unwrap_or_default().to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
