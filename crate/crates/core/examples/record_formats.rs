//! Writing and reading shot records as JSONL, CSV and packed binary.

use parity_mitigation::sim::{run_shots, Layout, RecordSet, Scheme, SequencePlan, SimConfig};
use parity_mitigation::{PrepMode, PrepModel, QubitNoise, ReadoutModel};
use serde_json::{json, Map};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SimConfig::new(
        ReadoutModel::symmetric(&[0.1, 0.05]),
        QubitNoise::none(2),
        "10".parse()?,
    );
    config.prep = PrepModel::new(vec![0.02, 0.02], PrepMode::PostSelected { k: 2 })?;
    let set = run_shots(config, SequencePlan::new(Scheme::Dummy, 1), Layout::Shared, 4, 1)?;
    let mut meta = Map::new();
    meta.insert("seed".into(), json!(1));

    let mut jsonl = Vec::new();
    set.write_jsonl(&mut jsonl, &meta)?;
    print!("{}", String::from_utf8(jsonl.clone())?);
    let (back, header) = RecordSet::read_jsonl(jsonl.as_slice())?;
    assert_eq!(back, set);
    assert_eq!(header["seed"], json!(1));

    let mut csv = Vec::new();
    set.write_csv(&mut csv, &meta)?;
    print!("{}", String::from_utf8(csv.clone())?);
    assert_eq!(RecordSet::read_csv(csv.as_slice())?.0, set);

    let mut bin = Vec::new();
    set.write_bin(&mut bin)?;
    println!("binary: {} bytes", bin.len());
    assert_eq!(RecordSet::read_bin(bin.as_slice())?, set);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
