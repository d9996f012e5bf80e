//! A small BibTeX-compatible toolchain.
//!
//! * [`bib`] parses `.bib` databases.
//! * [`aux`] reads and writes the `.aux` handoff file.
//! * [`bst`] parses `.bst` styles and [`vm`] runs them, producing a `.bbl`
//!   document and a `.blg` log ([`output`]).
//! * [`names`] implements author-list splitting and `format.name$`.
//! * [`latex`] simulates the citation side of a LaTeX run: it renders
//!   `\cite` marks and regenerates the `.aux` until labels stop changing.
//! * [`lint`] statically checks a style.
//! * [`cli`] ties these together the way `latex` and `bibtex` are invoked.

pub mod aux;
pub mod bib;
pub mod bst;
pub mod cli;
pub mod diag;
pub mod latex;
pub mod lint;
pub mod names;
pub mod output;
pub mod vm;

pub use aux::{parse_aux, unique_citation_order, write_aux, AuxFile};
pub use bib::{parse_bib, Database, Entry};
pub use bst::{parse_bst, BstProgram};
pub use diag::{ParseDiagnostic, Severity};
pub use output::{BblDocument, BlgLog};
pub use vm::{run, RunOutput, VmValue};
