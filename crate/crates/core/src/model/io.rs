//! Topology CSV (`node_id,kind,x,y`) with a `key = value` sidecar file
//! carrying `r_max`, the generator name, the seed and generator parameters.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{NodeKind, Position, Provenance, Rect, Topology};
use crate::error::{NetsyncError, Result};

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    node_id: usize,
    kind: NodeKind,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    r_max: f64,
    generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    region: Option<Rect>,
    #[serde(default)]
    params: BTreeMap<String, String>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_topology_csv<W: Write>(topology: &Topology, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, p) in topology.positions().iter().enumerate() {
        w.serialize(NodeRow {
            node_id: i,
            kind: topology.kind(i),
            x: p.x,
            y: p.y,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn sidecar_text(topology: &Topology) -> String {
    let prov = topology.provenance();
    let sidecar = Sidecar {
        r_max: topology.r_max(),
        generator: prov.generator.clone(),
        seed: prov.seed,
        region: topology.region(),
        params: prov.params.clone(),
    };
    toml::to_string(&sidecar).expect("sidecar serializes")
}

/// Writes `path` and its `.meta` sidecar.
pub fn save_topology(topology: &Topology, path: &Path) -> Result<()> {
    write_topology_csv(topology, fs::File::create(path)?)?;
    fs::write(sidecar_path(path), sidecar_text(topology))?;
    Ok(())
}

/// Parses node rows; agents must precede references in `node_id` order.
pub fn read_topology_csv<R: Read>(input: R, r_max: f64) -> Result<Topology> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows: Vec<NodeRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    rows.sort_by_key(|r| r.node_id);
    for (expected, r) in rows.iter().enumerate() {
        if r.node_id != expected {
            return Err(NetsyncError::Parse(format!(
                "node ids must be dense, missing {expected}"
            )));
        }
    }
    let mut agents = Vec::new();
    let mut references = Vec::new();
    for r in &rows {
        match r.kind {
            NodeKind::Agent if !references.is_empty() => {
                return Err(NetsyncError::Parse(format!(
                    "agent {} listed after a reference node",
                    r.node_id
                )))
            }
            NodeKind::Agent => agents.push(Position::new(r.x, r.y)),
            NodeKind::Reference => references.push(Position::new(r.x, r.y)),
        }
    }
    Topology::new(agents, references, r_max)
}

/// Reads `path` plus its sidecar. `r_max_override` wins over the sidecar.
pub fn load_topology(path: &Path, r_max_override: Option<f64>) -> Result<Topology> {
    let meta_path = sidecar_path(path);
    let sidecar: Option<Sidecar> = match fs::read_to_string(&meta_path) {
        Ok(text) => Some(toml::from_str(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let r_max = r_max_override
        .or(sidecar.as_ref().map(|s| s.r_max))
        .ok_or_else(|| {
            NetsyncError::Parse(format!("no r_max: {} has no sidecar", path.display()))
        })?;
    let mut topo = read_topology_csv(fs::File::open(path)?, r_max)?;
    if let Some(s) = sidecar {
        if let Some(region) = s.region {
            topo = topo.with_region(region);
        }
        topo = topo.with_provenance(Provenance {
            generator: s.generator,
            seed: s.seed,
            params: s.params,
        });
    }
    Ok(topo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_stochastic;

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let t = gen_stochastic(10.0, 0.5, 3.0, 11).unwrap();
        save_topology(&t, &path).unwrap();
        let back = load_topology(&path, None).unwrap();
        assert_eq!(back, t);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("node_id,kind,x,y\n0,agent,"));
    }

    #[test]
    fn rejects_agents_after_references() {
        let csv = "node_id,kind,x,y\n0,reference,0,0\n1,agent,1,0\n";
        assert!(read_topology_csv(csv.as_bytes(), 1.0).is_err());
        let gap = "node_id,kind,x,y\n0,agent,0,0\n2,agent,1,0\n";
        assert!(read_topology_csv(gap.as_bytes(), 1.0).is_err());
    }
}
