from abc import ABC, abstractmethod
import os


class SavableLoadable(ABC):
    """
    An interface for result containers which can be written to and read from disk.

    Every implementation stores JSON and owns a compound extension (e.g. ``'.dataset.json'``)
    which is appended to paths that do not already end with ``'.json'``.
    """

    file_extension: str = '.json'
    """Compound extension appended by :func:`with_extension`."""

    @classmethod
    @abstractmethod
    def load(cls, path: str):
        """
        Loads an object.

        Returns:
            A loaded object.
        """
        pass

    @abstractmethod
    def save(self, path: str) -> str:
        """
        Saves an object.

        Returns:
             An absolute path where the object was saved.
        """
        pass

    @classmethod
    def with_extension(cls, path: str) -> str:
        """
        Returns:
            ``path`` with :attr:`file_extension` appended unless it already ends with ``'.json'``.
        """
        if not path.endswith('.json'):
            path += cls.file_extension
        return path

    @staticmethod
    def prep_save_file(specified_path: str, interrupted: bool) -> str:
        """
        Creates parent directories if they're missing and, if
        ``interrupted=True``, prepends 'backup_' to the
        file name in the specified path.

        Returns:
            Final path.
        """
        dirname, filename = os.path.split(specified_path)
        if interrupted:
            # prefix to let user know that the run has been interrupted
            filename = f'backup_{filename}'
        if dirname:
            os.makedirs(dirname, exist_ok=True)
        return os.path.join(dirname, filename)
