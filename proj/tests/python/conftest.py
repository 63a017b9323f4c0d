import os
import sys

# prefer the freshly built extension from the CMake build tree
module_dir = os.environ.get("BINFILT_MODULE_DIR")
if module_dir:
    sys.path.insert(0, module_dir)
pkg_dir = os.environ.get("BINFILT_PKG_DIR")
if pkg_dir:
    sys.path.insert(0, pkg_dir)
else:
    # fall back to a sibling build directory when run by hand
    here = os.path.dirname(os.path.abspath(__file__))
    root = os.path.dirname(os.path.dirname(here))
    for cand in (os.path.join(root, "build"), root):
        if cand not in sys.path:
            sys.path.append(cand)
