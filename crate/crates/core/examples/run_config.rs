//! Runs a JSON config the way the command-line tool does and lists the
//! manifest.
//!
//! `cargo run --release --example run_config -- [config.json] [out_dir]`

use shrinking_rsa::config::RunConfig;
use shrinking_rsa::execute::execute;

const DEFAULT: &str = r#"{
    "mode": "sim1d",
    "seed": 42,
    "box_size": 1000,
    "replicas": 16,
    "snapshots": [1, 4, 8]
}"#;

fn main() -> shrinking_rsa::Result<()> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(&path).expect("readable config"),
        None => DEFAULT.to_string(),
    };
    let mut config = RunConfig::from_json(&text)?;
    let scratch = tempfile::tempdir().expect("temporary directory");
    config.out_dir = args.next().map_or_else(|| scratch.path().to_path_buf(), Into::into);
    let manifest = execute(&config)?;
    println!("config sha256 {}", manifest.config_sha256);
    for f in &manifest.files {
        println!("{:>8} B  {}  {}", f.bytes, &f.sha256[..16], f.path);
    }
    Ok(())
}
