const app = require('express')();
const db = require('./db');

app.post('/a', (req, res) => {
  db.run('INSERT INTO a VALUES (?)', req.body.a);
  res.end();
});

app.post('/b', (req, res) => {
  db.run('INSERT INTO b VALUES (?)', [req.query.b]);
  res.end();
});
