//! Writes the synthetic pair to disk and drives the four batch commands the
//! `osmofuse` binary exposes, all through the library entry points.

use clap::Parser;
use osmosis_fusion::cli::{run, Cli};
use osmosis_fusion::io::{save_alpha_png, save_png};
use osmosis_fusion::synthetic::fusion_pair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("osmofuse-demo");
    std::fs::create_dir_all(&dir)?;
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();

    let fx = fusion_pair(32, 2.0);
    save_png(&fx.foreground, p("f.png"))?;
    save_png(&fx.background, p("b.png"))?;
    save_alpha_png(&fx.alpha, p("alpha.png"))?;

    let commands: Vec<Vec<String>> = vec![
        vec![
            "fuse",
            "--fg",
            &p("f.png"),
            "--bg",
            &p("b.png"),
            "--alpha",
            &p("alpha.png"),
            "-o",
            &p("fused.png"),
            "--trace",
            &p("trace.csv"),
            "--save-v",
            &p("v.png"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec![
            "osmosis",
            "--fg",
            &p("f.png"),
            "--bg",
            &p("b.png"),
            "--alpha",
            &p("alpha.png"),
            "-o",
            &p("osmosis.png"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec![
            "poisson",
            "--fg",
            &p("f.png"),
            "--bg",
            &p("b.png"),
            "--mask",
            &p("alpha.png"),
            "-o",
            &p("poisson.png"),
        ]
        .into_iter()
        .map(String::from)
        .collect(),
        vec!["metrics", &p("fused.png"), &p("f.png")].into_iter().map(String::from).collect(),
    ];
    for args in commands {
        println!("osmofuse {}", args.join(" "));
        let cli = Cli::try_parse_from(std::iter::once("osmofuse".to_string()).chain(args))?;
        run(&cli)?;
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
