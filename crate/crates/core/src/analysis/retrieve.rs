use super::distance::Metric;
use crate::{Error, Result};

/// The `k` nearest database entries to `query`, ascending by distance with
/// ties broken by id.
///
/// When `query_id` is given, a database entry with that exact id is excluded
/// (self-exclusion for queries drawn from the database itself).
pub fn knn_retrieve(
    query: &[f64],
    query_id: Option<&str>,
    db: &[(String, Vec<f64>)],
    k: usize,
    metric: Metric,
) -> Result<Vec<(String, f64)>> {
    if db.is_empty() {
        return Err(Error::EmptyInput("empty retrieval database"));
    }
    let mut scored: Vec<(String, f64)> = Vec::with_capacity(db.len());
    for (id, v) in db {
        if query_id == Some(id.as_str()) {
            continue;
        }
        if v.len() != query.len() {
            return Err(Error::DimensionMismatch(format!(
                "entry {id:?} has dim {}, query has {}",
                v.len(),
                query.len()
            )));
        }
        scored.push((id.clone(), metric.distance(query, v)));
    }
    if k > scored.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {} eligible entries",
            scored.len()
        )));
    }
    scored.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}
