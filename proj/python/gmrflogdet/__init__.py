# Copyright (c) 2026, the gmrflogdet authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Matrix-free log-determinants for sparse SPD precision matrices.

Probing-vector trace estimation of tr log Q, rational contour-quadrature
approximation of log(Q)v, and multi-shift Krylov solves, with a modified
Newton fit of GMRF hyperparameters on regular grids.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
