const express = require('express');
const libxmljs = require('libxmljs');
const app = express();

app.post('/import', function (req, res) {
  const doc = libxmljs.parseXml(req.body.xml);
  res.json({ root: doc.root().name() });
});
