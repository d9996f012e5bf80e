//! A missing field written without a check logs a warning; guarding it with
//! `empty$` keeps the log clean.

use bstkit::{parse_aux, parse_bib, parse_bst, run};

fn main() {
    let aux = parse_aux("\\citation{Ulam-1964}\n\\citation{YangYu}\n").unwrap();
    let dbs = [
        parse_bib(include_str!("../data/my.bib"), "my.bib").0,
        parse_bib(include_str!("../data/yangyu.bib"), "yangyu.bib").0,
    ];
    for (name, text) in [
        ("unchecked", include_str!("../data/number_unchecked.bst")),
        ("checked", include_str!("../data/number_checked.bst")),
    ] {
        let (program, _) = parse_bst(text, name);
        let out = run(&program, &aux, &dbs);
        println!("== {name}: {} warning(s)", out.log.warning_count());
        print!("{}", out.log.render());
        print!("{}", out.bbl_text());
        println!();
    }
}
