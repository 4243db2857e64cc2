const app = require('express')();
const db = require('./db');

function save(table, record) {
  db.run(`INSERT INTO ${table} VALUES (?)`, record);
}

app.post('/save', (req, res) => {
  save('items', req.body);
  res.end();
});
