use std::fmt::Write as _;

use somna::superclass::{agglomerate, cut, superclass_contiguity};

use crate::config::{echo_json, require, SuperclassArgs};
use crate::error::{CliError, Result};

pub fn run(args: SuperclassArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let model_path = require(cfg.model.clone(), "model")?;
    let output = require(cfg.output.clone(), "output")?;
    let k = cfg.k.unwrap_or(3);
    cfg.k = Some(k);

    let model = super::load_model(&model_path)?;
    let codebook = model.codebook()?;
    if k == 0 || k > codebook.units() {
        return Err(CliError::Config(format!(
            "k must lie in 1..={}, got {k}",
            codebook.units()
        )));
    }

    let dendrogram = agglomerate(&codebook)?;
    let classes = cut(&dendrogram, k)?;
    let topology = codebook.topology();

    let echo = echo_json("superclass", &cfg);
    let mut out = format!("# {echo}\n");
    writeln!(out, "unit_row,unit_col,superclass_id").unwrap();
    for unit in 0..codebook.units() {
        let (r, c) = topology.coords(unit);
        writeln!(out, "{r},{c},{}", classes.labels()[unit]).unwrap();
    }
    super::write_file(&output, &out)?;

    let connected = superclass_contiguity(&classes, topology)?;
    for (id, (group, ok)) in classes.members().iter().zip(&connected).enumerate() {
        println!(
            "super-class {id}: {} units, {}",
            group.len(),
            if *ok { "connected" } else { "split on the grid" }
        );
    }
    println!("wrote {}", output.display());

    if let Some(path) = &cfg.dendrogram {
        let mut value = serde_json::to_value(&dendrogram).map_err(somna::Error::from)?;
        value
            .as_object_mut()
            .expect("dendrogram is an object")
            .insert("config".into(), serde_json::from_str(&echo).expect("echo is JSON"));
        let mut text = serde_json::to_string_pretty(&value).map_err(somna::Error::from)?;
        text.push('\n');
        super::write_file(path, &text)?;
        println!("dendrogram -> {}", path.display());
    }
    Ok(())
}
