from .figures import (DEFAULT_SPECS, EXPECTED_COLUMNS, FigureSpec, PlotsError,
                      RenderResult, load_rows, render)

__version__ = "0.1.0"
