//! Runs the hello-word style over two entries and prints the `.bbl`.

use bstkit::{parse_aux, parse_bib, parse_bst, run};

fn main() {
    let aux = parse_aux(
        "\\relax\n\\citation{Ulam-1964}\n\\citation{Poincare}\n\\citation{Ulam-1964}\n\\bibstyle{helloword}\n\\bibdata{my}\n",
    )
    .expect("valid aux");
    let (db, _) = parse_bib(include_str!("../data/my.bib"), "my.bib");
    let (style, diags) = parse_bst(include_str!("../data/helloword.bst"), "helloword.bst");
    assert!(diags.is_empty());

    let out = run(&style, &aux, &[db]);
    print!("{}", out.bbl_text());
}
