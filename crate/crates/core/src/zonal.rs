//! Zonal statistics of raster layers over polygon zones.
//!
//! Polygons are rasterized once into an [`IntersectionsFile`] (per-row column
//! ranges of covered pixel centers) using only the raster metadata; every
//! layer sharing that grid is then aggregated with one pass over its rows.

mod covariates;
mod intersections;
mod neighbors;
mod polygon;
mod raster;
mod stats;

pub use covariates::{export_covariates, read_covariates, CovariateTable, StatsTable};
pub use intersections::{build_intersections, IntersectionsFile, RowRange};
pub use neighbors::{neighbor_join, polygons_intersect};
pub use polygon::{read_polygons, Polygon, PolygonSet};
pub use raster::{read_ascii_grid, read_ascii_layer, write_ascii_grid, Pixel, RasterGrid, RasterLayer, RasterMetadata};
pub use stats::{zonal_stats, zonal_stats_partitioned, Stat, Summary, ZonalResult, ZoneStats};
