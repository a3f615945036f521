//! Concrete text syntax for automata: lexer, parser and canonical printer.

pub mod lexer;
mod parser;
mod printer;
pub(crate) mod stream;

pub use parser::{parse_model, Parsed};
pub(crate) use printer::modifier_suffix;
pub use printer::print_model;
