//! Output formats: results CSV, text table, SVG figures and the JSON dump.

mod csv;
mod results;
mod svg;
mod table;

pub use self::csv::{emit_csv, parse_csv, quantize, CSV_HEADER};
pub use self::results::{ResultsFile, RESULTS_SCHEMA_VERSION};
pub use self::svg::{emit_figures, render_figures, Figure, FIGURE_FILES};
pub use self::table::render_table;
