//! LaTeX passes over a document with an inline bibliography, from no `.aux`
//! and from an `.aux` with stale labels.

use bstkit::latex::{fixpoint, scan_tex};
use bstkit::{parse_aux, write_aux};

fn main() {
    let scan = scan_tex(include_str!("../data/test.tex")).unwrap().with_jobname("test");

    let passes = fixpoint(&scan, None, 5).unwrap();
    for (i, p) in passes.iter().enumerate() {
        println!("pass {}: {}", i + 1, p.rendered.lines().nth(3).unwrap_or(""));
        for w in &p.warnings {
            println!("    LaTeX Warning: {w}");
        }
    }
    print!("final aux:\n{}", write_aux(&passes.last().unwrap().new_aux));

    let mut stale = parse_aux(include_str!("../data/test.aux")).unwrap();
    stale.set_bibcite("Poincare", "10");
    stale.set_bibcite("Ulam-1964", "25");
    for (i, p) in fixpoint(&scan, Some(&stale), 5).unwrap().iter().enumerate() {
        println!("stale pass {}: {}", i + 1, p.rendered.lines().nth(3).unwrap_or(""));
    }
}
