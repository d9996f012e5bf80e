//! The full build (latex, bibtex, latex until stable) in a scratch directory.

use std::fs;

use bstkit::cli::{cmd_pipeline, CliConfig, Subcommand};

fn main() -> std::io::Result<()> {
    let dir = std::env::temp_dir().join(format!("bstkit-pipeline-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("test3.tex"), include_str!("../data/test3.tex"))?;
    fs::write(dir.join("my.bib"), include_str!("../data/my.bib"))?;
    fs::write(dir.join("helloword.bst"), include_str!("../data/helloword.bst"))?;

    let cfg = CliConfig::new(Subcommand::Pipeline, "test3").in_dir(&dir);
    let code = cmd_pipeline(&cfg, &mut std::io::stdout(), &mut std::io::stderr());
    println!("exit {}", code.code());
    for name in ["test3.aux", "test3.bbl"] {
        println!("--- {name}");
        print!("{}", fs::read_to_string(dir.join(name))?);
    }
    let rendered = fs::read_to_string(dir.join("test3.rendered.txt"))?;
    println!("--- rendered\n{}", rendered.lines().nth(3).unwrap_or(""));
    fs::remove_dir_all(&dir)
}
