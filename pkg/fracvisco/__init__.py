from .kernel import KernelParams  # noqa
from .modal_system import LoadSignal, ModalSystem  # noqa

__version__ = '0.3.0'
