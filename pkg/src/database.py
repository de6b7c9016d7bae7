"""
Run Store
SQLite storage for benchmark trial results
"""

import json
import sqlite3
from datetime import datetime, timedelta
from pathlib import Path
from typing import Dict, List, Optional

from src.config import Config
from src.logger import setup_logger
from src.utils import check

logger = setup_logger(__name__)


class RunStore:
    """SQLite store for bench trials, one row per (suite, trial)"""

    def __init__(self, db_path: Optional[str] = None):
        self.db_path = db_path or Config.DB_PATH
        if self.db_path != ':memory:':
            Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
        self.conn = None
        self.init_database()

    def init_database(self):
        """Open the database and create tables"""
        try:
            self.conn = sqlite3.connect(self.db_path)
            self.conn.row_factory = sqlite3.Row
            cursor = self.conn.cursor()

            cursor.execute('''
                CREATE TABLE IF NOT EXISTS bench_runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    timestamp TEXT NOT NULL,
                    suite TEXT NOT NULL,
                    trial INTEGER NOT NULL,
                    seed INTEGER NOT NULL,
                    status TEXT NOT NULL,
                    elapsed REAL,
                    peak_rss INTEGER,
                    detail TEXT,
                    created_at TEXT DEFAULT CURRENT_TIMESTAMP
                )
            ''')

            cursor.execute('''
                CREATE INDEX IF NOT EXISTS idx_suite
                ON bench_runs(suite)
            ''')

            cursor.execute('''
                CREATE INDEX IF NOT EXISTS idx_timestamp
                ON bench_runs(timestamp)
            ''')

            self.conn.commit()
            logger.info(check(f"Run store initialized: {self.db_path}"))

        except sqlite3.Error as e:
            logger.error(f"Run store initialization failed: {e}")
            raise

    def store_results(self, results: List[Dict]) -> int:
        """
        Store bench trial results

        Args:
            results: dicts with suite, trial, seed, status and optionally
                timestamp, elapsed, peak_rss, detail

        Returns:
            Number of rows stored
        """
        if not results:
            return 0

        try:
            cursor = self.conn.cursor()
            for result in results:
                detail = result.get('detail')
                cursor.execute('''
                    INSERT INTO bench_runs (timestamp, suite, trial, seed, status, elapsed, peak_rss, detail)
                    VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                ''', (
                    result.get('timestamp') or datetime.now().isoformat(),
                    result['suite'],
                    result['trial'],
                    result['seed'],
                    result['status'],
                    result.get('elapsed'),
                    result.get('peak_rss'),
                    json.dumps(detail, default=str) if detail is not None else None,
                ))

            self.conn.commit()
            logger.debug(f"Stored {len(results)} bench results")
            return len(results)

        except sqlite3.Error as e:
            logger.error(f"Failed to store bench results: {e}")
            self.conn.rollback()
            return 0

    def get_runs(self, suite: Optional[str] = None) -> List[Dict]:
        """Stored runs, oldest first, optionally for one suite"""
        try:
            cursor = self.conn.cursor()
            if suite is None:
                cursor.execute('SELECT * FROM bench_runs ORDER BY id ASC')
            else:
                cursor.execute('SELECT * FROM bench_runs WHERE suite = ? ORDER BY id ASC', (suite,))

            runs = []
            for row in cursor.fetchall():
                run = dict(row)
                if run.get('detail'):
                    run['detail'] = json.loads(run['detail'])
                runs.append(run)
            return runs

        except sqlite3.Error as e:
            logger.error(f"Failed to fetch runs: {e}")
            return []

    def cleanup_old_data(self, days: int = 30) -> int:
        """
        Delete runs older than `days`

        Returns:
            Number of deleted rows
        """
        try:
            cutoff_date = (datetime.now() - timedelta(days=days)).isoformat()
            cursor = self.conn.cursor()
            cursor.execute('DELETE FROM bench_runs WHERE timestamp < ?', (cutoff_date,))
            deleted = cursor.rowcount
            self.conn.commit()

            if deleted > 0:
                logger.info(f"Cleaned up {deleted} old runs")
            return deleted

        except sqlite3.Error as e:
            logger.error(f"Failed to cleanup old runs: {e}")
            return 0

    def get_stats(self) -> Dict:
        """Run counts per status and mean elapsed time"""
        try:
            cursor = self.conn.cursor()

            cursor.execute('SELECT COUNT(*) AS total, AVG(elapsed) AS mean_elapsed FROM bench_runs')
            row = cursor.fetchone()
            cursor.execute('SELECT status, COUNT(*) AS n FROM bench_runs GROUP BY status')
            by_status = {r['status']: r['n'] for r in cursor.fetchall()}

            return {
                'total_runs': row['total'],
                'mean_elapsed': row['mean_elapsed'],
                'by_status': by_status,
            }

        except sqlite3.Error as e:
            logger.error(f"Failed to get stats: {e}")
            return {}

    def close(self):
        """Close database connection"""
        if self.conn:
            self.conn.close()
