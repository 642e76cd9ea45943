//! Text formats: datasets, schedule CSV and Gantt charts.

pub mod dataset;
pub mod gantt;
pub mod schedule_csv;

pub use dataset::{
    parse_instance, parse_instance_with_warnings, write_instance, ParseError, ParseWarning,
};
pub use gantt::{
    render_gantt, render_svg, render_text, GanttError, GanttFormat, SvgOptions, TextOptions,
};
pub use schedule_csv::{read_schedule_csv, write_schedule_csv, CsvError, SCHEDULE_CSV_HEADER};
