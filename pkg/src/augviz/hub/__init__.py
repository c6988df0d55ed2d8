from .store import PublishReceipt, SpecStore
from .service import make_server, run_in_thread, serve_forever

__all__ = ["PublishReceipt", "SpecStore", "make_server", "run_in_thread",
           "serve_forever"]
