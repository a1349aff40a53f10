"""
Test suite for the tom-sim logger and error handling modules.
"""
import logging
import os
import tempfile
import unittest

from tom_sim.utils.errors import (
    BadCellError,
    ConfigError,
    ErrorSeverity,
    ModelValidationError,
    TomSimError,
    ZeroMassError,
)
from tom_sim.utils.logger import TomSimLogger, configure_root


class TestLogger(unittest.TestCase):
    def test_logger_info(self):
        logger = TomSimLogger('tom_sim.test')
        with self.assertLogs('tom_sim.test', level='INFO') as captured:
            logger.info('Test info message')
        self.assertIn('Test info message', captured.output[0])

    def test_one_console_handler_per_name(self):
        TomSimLogger('tom_sim.test.shared')
        logger = TomSimLogger('tom_sim.test.shared')
        self.assertEqual(len(logger.logger.handlers), 1)

    def test_log_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'run.log')
            logger = TomSimLogger('tom_sim.test.file', log_file=path)
            logger.warning('written to disk')
            for handler in logger.logger.handlers:
                handler.flush()
            with open(path) as handle:
                self.assertIn('WARNING - written to disk', handle.read())
            for handler in list(logger.logger.handlers):
                if isinstance(handler, logging.FileHandler):
                    handler.close()
                    logger.logger.removeHandler(handler)

    def test_configure_root_sets_level(self):
        configure_root(logging.DEBUG)
        self.assertEqual(logging.getLogger('tom_sim').level, logging.DEBUG)
        configure_root(logging.INFO)


class TestErrors(unittest.TestCase):
    def test_hierarchy(self):
        for error in (ZeroMassError('normalize'), BadCellError(12, 9),
                      ConfigError('RunConfig', ['workers=0 must be >= 1'])):
            self.assertIsInstance(error, TomSimError)

    def test_context_and_severity(self):
        error = ConfigError('RunConfig', ['seeds missing'], 'runs/defaults.yaml')
        self.assertEqual(error.severity, ErrorSeverity.HIGH)
        self.assertEqual(error.context['config_path'], 'runs/defaults.yaml')
        self.assertEqual(error.invalid_values, ['seeds missing'])
        self.assertIn('seeds missing', str(error))

    def test_errors_log_themselves(self):
        with self.assertLogs('tom_sim.errors', level='WARNING') as captured:
            ModelValidationError('focal', ['horizon must be >= 1'])
        self.assertIn('ModelValidationError', captured.output[0])

    def test_low_severity_logs_at_debug(self):
        error = ZeroMassError('bayes_update', factor=2)
        self.assertEqual(error.severity, ErrorSeverity.LOW)
        self.assertEqual(error.context['factor'], 2)
        self.assertIn('factor 2', error.message)


if __name__ == '__main__':
    unittest.main()
