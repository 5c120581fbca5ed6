use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::{CheckOpts, Identity};

/// One row of the suite: a named checker run at pinned precision.
#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub id: String,
    pub identity: Identity,
    #[serde(flatten)]
    pub opts: CheckOpts,
}

#[derive(Deserialize)]
struct Head {
    id: String,
    identity: Identity,
}

impl Row {
    /// Parses a manifest entry; keys other than `id`, `identity` and the check options are rejected.
    pub fn from_json(v: Value) -> Result<Row, String> {
        let Value::Object(mut m) = v else {
            return Err("each manifest entry must be an object".into());
        };
        let head = Head::deserialize(json!({
            "id": m.remove("id").unwrap_or(Value::Null),
            "identity": m.remove("identity").unwrap_or(Value::Null),
        }))
        .map_err(|e| e.to_string())?;
        let opts = CheckOpts::deserialize(Value::Object(m)).map_err(|e| format!("row {}: {e}", head.id))?;
        Ok(Row { id: head.id, identity: head.identity, opts })
    }
}

fn row(id: &str, identity: Identity, digits: u32, tolerance: f64, f: impl FnOnce(&mut CheckOpts)) -> Row {
    let mut opts = CheckOpts { digits: Some(digits), tolerance: Some(tolerance), ..CheckOpts::default() };
    f(&mut opts);
    Row { id: id.to_string(), identity, opts }
}

fn forms(specs: &[&str]) -> Vec<String> {
    specs.iter().map(|s| s.to_string()).collect()
}

/// Taus used for the sample-based rows: three points of the default arc.
const THREE_TAUS: [&str; 3] = ["-0.3-0.8i", "0.45-1.2i", "-0.2-1.1i"];

/// The acceptance matrix.
pub fn default_rows() -> Vec<Row> {
    let three = || THREE_TAUS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    vec![
        row("cocycle1-delta", Identity::Cocycle1, 40, 1e-30, |o| {
            o.pairs = 20;
            o.max_len = 6;
        }),
        row("cocycle2-delta", Identity::Cocycle2, 40, 1e-20, |o| {
            o.pairs = 10;
            o.max_len = 4;
        }),
        row("lincomb-delta", Identity::Lincomb, 40, 1e-20, |o| {
            o.pairs = 1;
            o.max_len = 4;
        }),
        row("mellin-delta", Identity::Mellin, 40, 1e-25, |o| o.s = vec![15]),
        row("mellin-delta2", Identity::Mellin, 40, 1e-15, |o| {
            o.forms = forms(&["delta", "delta"]);
            o.s = vec![15, 15];
        }),
        row("route-delta", Identity::Route, 40, 1e-18, |o| {
            o.pairs = 3;
            o.max_len = 4;
        }),
        row("route-delta2", Identity::Route, 40, 1e-18, |o| {
            o.forms = forms(&["delta", "delta"]);
            o.pairs = 1;
            o.max_len = 3;
        }),
        row("bkm-delta", Identity::Bkm, 40, 1e-25, |o| {
            o.pairs = 10;
            o.max_len = 4;
            o.taus = three();
        }),
        row("bkm-theta", Identity::Bkm, 30, 1e-12, |o| {
            o.forms = forms(&["theta:1:2"]);
            o.level = Some(8);
            o.pairs = 3;
            o.max_len = 2;
            o.taus = three();
        }),
        row("fin0-delta", Identity::Fin0, 30, 1e-15, |o| {
            o.pairs = 3;
            o.max_len = 3;
            o.taus = three();
        }),
        row("fin0-theta", Identity::Fin0, 30, 1e-8, |o| {
            o.forms = forms(&["theta:1:2", "theta:1:2"]);
            o.level = Some(8);
            o.pairs = 2;
            o.max_len = 2;
            o.taus = three();
        }),
        row("cocycle3-delta", Identity::Cocycle3, 25, 1e-8, |o| {
            // every matrix of these pairs has c != 0
            o.seed = 6;
            o.pairs = 3;
            o.max_len = 3;
        }),
    ]
}
