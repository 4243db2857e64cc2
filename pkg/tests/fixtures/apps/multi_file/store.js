const sqlite3 = require('sqlite3');
const db = new sqlite3.Database('ideas.db');

function save(text) {
  db.run('INSERT INTO ideas VALUES (?)', [text]);
}

module.exports = { save };
