//! JSON process files and named presets.
//!
//! ```json
//! {"name": "hmm2", "states": ["0", "1"], "obs": ["-"],
//!  "edges": [{"from": "0", "to": "0", "x": 0, "y": "-", "p": 0.45}, ...],
//!  "periodic_ok": false}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    make_bsc_side_info, make_gilbert_elliott, make_hmm2, make_iid, make_iid_bernoulli,
    make_periodic_bb00, Edge, EdgeKernel,
};
use crate::{Error, Result};

/// Labels may be written as strings or integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Label {
    Text(String),
    Int(i64),
}

impl Label {
    fn into_string(self) -> String {
        match self {
            Label::Text(s) => s,
            Label::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub from: String,
    pub to: String,
    pub x: u8,
    pub y: String,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub name: String,
    pub states: Vec<String>,
    pub obs: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub periodic_ok: bool,
}

#[derive(Deserialize)]
struct RawEdge {
    from: Label,
    to: Label,
    x: u8,
    y: Label,
    p: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    name: String,
    states: Vec<Label>,
    obs: Vec<Label>,
    edges: Vec<RawEdge>,
    #[serde(default)]
    periodic_ok: bool,
}

impl ProcessSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(text)?;
        Ok(Self {
            name: raw.name,
            states: raw.states.into_iter().map(Label::into_string).collect(),
            obs: raw.obs.into_iter().map(Label::into_string).collect(),
            edges: raw
                .edges
                .into_iter()
                .map(|e| EdgeSpec {
                    from: e.from.into_string(),
                    to: e.to.into_string(),
                    x: e.x,
                    y: e.y.into_string(),
                    p: e.p,
                })
                .collect(),
            periodic_ok: raw.periodic_ok,
        })
    }

    pub fn to_kernel(&self) -> Result<EdgeKernel> {
        let lookup = |labels: &[String], l: &str, what: &str| {
            labels
                .iter()
                .position(|s| s == l)
                .ok_or_else(|| Error::BadSpec(format!("unknown {what} label {l:?}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok(Edge {
                    from: lookup(&self.states, &e.from, "state")?,
                    to: lookup(&self.states, &e.to, "state")?,
                    x: e.x,
                    y: lookup(&self.obs, &e.y, "observation")?,
                    p: e.p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EdgeKernel::new(
            self.name.clone(),
            self.states.clone(),
            self.obs.clone(),
            &edges,
            self.periodic_ok,
        )
    }

    pub fn from_kernel(k: &EdgeKernel) -> Self {
        Self {
            name: k.name().to_string(),
            states: k.state_labels().to_vec(),
            obs: k.obs_labels().to_vec(),
            edges: k
                .edges()
                .into_iter()
                .map(|e| EdgeSpec {
                    from: k.state_labels()[e.from].clone(),
                    to: k.state_labels()[e.to].clone(),
                    x: e.x,
                    y: k.obs_labels()[e.y].clone(),
                    p: e.p,
                })
                .collect(),
            periodic_ok: k.periodic_ok(),
        }
    }
}

fn parse_params(s: &str, expected: usize) -> Result<Vec<f64>> {
    let vals = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::BadSpec(format!("bad number {v:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if vals.len() != expected {
        return Err(Error::BadSpec(format!(
            "expected {expected} parameters, got {}",
            vals.len()
        )));
    }
    if vals.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::BadSpec(format!("parameters must lie in [0,1]: {s}")));
    }
    Ok(vals)
}

/// Resolves a preset name:
/// `bb00`, `hmm2`, `det0`, `iid:<p>`, `bsc:<p>`, `ge` or `ge:<pg>,<pb>,<g2b>,<b2g>`.
pub fn parse_preset(name: &str) -> Result<EdgeKernel> {
    let (head, args) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    match (head, args) {
        ("bb00", None) => Ok(make_periodic_bb00()),
        ("hmm2", None) => Ok(make_hmm2()),
        ("det0", None) => Ok(make_iid(&[vec![1.0], vec![0.0]])?.with_name("det0")),
        ("iid", Some(a)) => make_iid_bernoulli(parse_params(a, 1)?[0]),
        ("bsc", Some(a)) => make_bsc_side_info(parse_params(a, 1)?[0]),
        ("ge", None) => Ok(make_gilbert_elliott(0.01, 0.2, 0.1, 0.2)?.with_name("ge")),
        ("ge", Some(a)) => {
            let p = parse_params(a, 4)?;
            make_gilbert_elliott(p[0], p[1], p[2], p[3])
        }
        _ => Err(Error::BadSpec(name.to_string())),
    }
}

/// Loads a JSON process file if `arg` names an existing file, otherwise
/// resolves it as a preset.
pub fn load_process(arg: &str) -> Result<EdgeKernel> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return ProcessSpec::from_json(&text)?.to_kernel();
    }
    parse_preset(arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_resolve() {
        for name in [
            "bb00",
            "hmm2",
            "det0",
            "iid:0.5",
            "iid:0.11",
            "bsc:0.11",
            "ge",
            "ge:0.01,0.2,0.1,0.2",
        ] {
            let k = parse_preset(name).unwrap();
            assert!(k.num_states() >= 1, "{name}");
        }
        assert_eq!(parse_preset("ge").unwrap().num_states(), 2);
        assert!(parse_preset("iid:1.5").is_err());
        assert!(parse_preset("ge:0.1,0.2").is_err());
        assert!(parse_preset("nope").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let k = parse_preset("ge").unwrap();
        let spec = ProcessSpec::from_kernel(&k);
        let text = serde_json::to_string(&spec).unwrap();
        let back = ProcessSpec::from_json(&text).unwrap().to_kernel().unwrap();
        assert_eq!(back.edges(), k.edges());
    }

    #[test]
    fn integer_labels_and_validation() {
        let text = r#"{"name":"coin","states":[0],"obs":["-"],
            "edges":[{"from":0,"to":0,"x":0,"y":"-","p":0.5},{"from":0,"to":0,"x":1,"y":"-","p":0.5}]}"#;
        let k = ProcessSpec::from_json(text).unwrap().to_kernel().unwrap();
        assert_eq!(k.num_states(), 1);
        assert!(!k.periodic_ok());

        let bad = r#"{"name":"bad","states":["a"],"obs":["-"],
            "edges":[{"from":"a","to":"a","x":0,"y":"-","p":0.4}]}"#;
        assert!(matches!(
            ProcessSpec::from_json(bad).unwrap().to_kernel(),
            Err(Error::InvalidKernel(_))
        ));
        let unknown = r#"{"name":"bad","states":["a"],"obs":["-"],
            "edges":[{"from":"b","to":"a","x":0,"y":"-","p":1.0}]}"#;
        assert!(matches!(
            ProcessSpec::from_json(unknown).unwrap().to_kernel(),
            Err(Error::BadSpec(_))
        ));
    }
}
