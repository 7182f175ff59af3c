from .cli_utils import (
    print_success,
    print_error,
    print_warning,
    print_info,
    print_table,
    format_json,
    to_jsonable,
    handle_exception,
)

from .logger import (
    debug,
    info,
    warning,
    error,
    file_only,
    set_log_file,
    set_log_level
)

from .parallel import (
    derive_rngs,
    parallel_map,
    resolve_worker_count,
)
