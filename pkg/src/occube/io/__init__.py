"""Import/export: OCEL logs, CSV/XES conversion, flattened exports, cube dumps."""

from occube.io.dump import DUMP_VERSION, CubeDump, load_dump, save_dump
from occube.io.ocel import export_ocel, import_ocel
from occube.io.tabular import CsvMappingConfig, export_flattened, import_csv, import_xes

__all__ = [
    "DUMP_VERSION",
    "CsvMappingConfig",
    "CubeDump",
    "export_flattened",
    "export_ocel",
    "import_csv",
    "import_ocel",
    "import_xes",
    "load_dump",
    "save_dump",
]
